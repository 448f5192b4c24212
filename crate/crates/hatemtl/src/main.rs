fn main() {
    std::process::exit(hatemtl::cli::run(std::env::args_os()));
}
