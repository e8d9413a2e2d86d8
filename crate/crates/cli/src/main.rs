use clap::Parser;

fn main() {
    let cli = ctdper::Cli::parse();
    match ctdper::run(cli) {
        Ok(out) => {
            print!("{}", out.stdout);
            std::process::exit(out.code);
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
