fn main() {
    std::process::exit(fpt_images::cli::run(std::env::args_os()));
}
