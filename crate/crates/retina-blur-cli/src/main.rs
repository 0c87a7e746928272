fn main() {
    std::process::exit(retina_blur_cli::run(std::env::args_os()));
}
