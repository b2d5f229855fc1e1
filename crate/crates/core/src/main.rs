fn main() {
    std::process::exit(pachinqo::cli::run(std::env::args_os()));
}
