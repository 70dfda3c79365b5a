fn main() {
    std::process::exit(kerr_coupler::cli::run(std::env::args_os()));
}
