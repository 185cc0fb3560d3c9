fn main() {
    std::process::exit(knnmt::cli::run(std::env::args_os()));
}
