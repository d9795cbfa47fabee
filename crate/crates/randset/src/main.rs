fn main() {
    std::process::exit(randset::cli::main_entry());
}
