fn main() {
    std::process::exit(smds::cli::run(std::env::args_os()));
}
