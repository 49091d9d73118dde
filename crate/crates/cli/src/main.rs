use clap::Parser;

fn main() {
    let cli = laserkit_cli::Cli::parse();
    std::process::exit(laserkit_cli::run(&cli));
}
