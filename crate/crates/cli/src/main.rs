use clap::Parser;

fn main() {
    let cli = walklab_cli::Cli::parse();
    match walklab_cli::run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    }
}
