fn main() {
    let outcome = unidil_cli::run_command(std::env::args_os());
    std::process::exit(outcome.exit_code);
}
