fn main() {
    std::process::exit(vosfuse::cli::run(std::env::args_os()));
}
