fn main() {
    std::process::exit(lassokit::cli::run(std::env::args_os()));
}
