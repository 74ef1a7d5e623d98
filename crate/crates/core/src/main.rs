fn main() {
    std::process::exit(digitsum::cli::run(std::env::args_os()));
}
