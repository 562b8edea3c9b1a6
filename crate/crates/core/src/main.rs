fn main() {
    let args: Vec<String> = std::env::args().collect();
    // unlocked handles: worker threads may still print panic messages
    let code = refjava::cli::run(&args, &mut std::io::stdout(), &mut std::io::stderr());
    std::process::exit(code);
}
