fn main() {
    std::process::exit(rgb2msi::cli::run(std::env::args_os()));
}
