fn main() {
    std::process::exit(margin_tensor::cli::run(std::env::args_os()));
}
