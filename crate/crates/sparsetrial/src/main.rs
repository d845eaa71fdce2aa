use clap::Parser;

fn main() {
    let cli = sparsetrial::cli::Cli::parse();
    match sparsetrial::cli::execute(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
