use clap::Parser;

fn main() {
    let cli = fblnet::cli::Cli::parse();
    match fblnet::cli::run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    }
}
