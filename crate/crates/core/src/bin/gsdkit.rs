fn main() {
    std::process::exit(gsdkit::cli::run(std::env::args_os()));
}
