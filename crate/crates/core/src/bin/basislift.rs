fn main() {
    std::process::exit(basislift::cli::main_with_stdio());
}
