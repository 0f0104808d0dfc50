use arbcell::cli;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match cli::run(&args) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("{e}");
            if e.exit_code() == 1 {
                eprintln!("\n{}", cli::USAGE);
            }
            std::process::exit(e.exit_code());
        }
    }
}
