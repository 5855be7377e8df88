fn main() {
    std::process::exit(semilinear_mc::cli::run(std::env::args_os()));
}
