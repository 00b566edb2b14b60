fn main() {
    std::process::exit(cyclic_pricing::cli::run(std::env::args_os()));
}
