fn main() {
    std::process::exit(starspec::cli::run(std::env::args_os()));
}
