fn main() {
    std::process::exit(featlearn::cli::run(std::env::args_os()));
}
