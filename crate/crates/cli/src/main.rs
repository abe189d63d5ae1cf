use clap::Parser;

fn main() {
    let cli = windres::cli::Cli::parse();
    if let Err(err) = windres::run(cli) {
        eprintln!("windres: {err}");
        std::process::exit(err.kind.code());
    }
}
