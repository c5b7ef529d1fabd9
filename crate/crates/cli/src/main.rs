use clap::Parser;
use invsurr_cli::Cli;

fn main() {
    let cli = Cli::parse();
    match cli.execute() {
        Ok(summary) => println!("{summary}"),
        Err(e) => {
            eprintln!("invsurr: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
