fn main() {
    std::process::exit(relaylab::cli::run(std::env::args_os()));
}
