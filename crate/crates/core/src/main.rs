fn main() {
    std::process::exit(clusterdiff::cli::run(std::env::args_os()));
}
