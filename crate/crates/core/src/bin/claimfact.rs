fn main() {
    std::process::exit(claimfact::cli::run(std::env::args_os()));
}
