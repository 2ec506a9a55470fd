fn main() {
    std::process::exit(qkdnoise_cli::run(std::env::args_os()));
}
