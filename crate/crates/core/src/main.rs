fn main() {
    qsheaf::cli::init_threads();
    std::process::exit(qsheaf::cli::run(std::env::args_os()));
}
