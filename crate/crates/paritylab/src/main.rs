fn main() {
    std::process::exit(paritylab::cli::run(std::env::args_os()));
}
