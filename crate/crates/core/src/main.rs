fn main() {
    std::process::exit(shapevar::cli::run(std::env::args_os()));
}
