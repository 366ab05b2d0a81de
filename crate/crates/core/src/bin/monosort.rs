fn main() {
    std::process::exit(monosort::cli::run(std::env::args_os()));
}
