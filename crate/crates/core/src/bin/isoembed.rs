fn main() {
    std::process::exit(isoembed::cli::main_entry());
}
