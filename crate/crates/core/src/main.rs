fn main() {
    std::process::exit(nemext::cli::run(std::env::args_os()));
}
