fn main() {
    std::process::exit(ordinal_bayes::cli::run(std::env::args_os()));
}
