fn main() {
    std::process::exit(capelast::cli::main_with_args(std::env::args_os()));
}
