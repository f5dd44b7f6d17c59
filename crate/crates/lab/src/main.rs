fn main() {
    std::process::exit(hls_lab::cli::run(std::env::args_os()));
}
