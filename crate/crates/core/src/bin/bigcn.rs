fn main() {
    std::process::exit(bigcn::cli::run(std::env::args_os()));
}
