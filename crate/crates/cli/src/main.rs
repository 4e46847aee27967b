fn main() {
    std::process::exit(tk_cli::run_command(std::env::args_os()));
}
