fn main() {
    std::process::exit(seba_core::cli::run(std::env::args_os()));
}
