fn main() {
    std::process::exit(edgewall::cli::run(std::env::args_os()));
}
