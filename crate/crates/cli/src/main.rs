fn main() {
    std::process::exit(rydpol_cli::main_with_args(std::env::args_os()));
}
