fn main() {
    std::process::exit(hardy_corner::cli::run(std::env::args_os()));
}
