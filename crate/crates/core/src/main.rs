fn main() {
    std::process::exit(bioassay_core::cli::main_with_args(std::env::args_os()));
}
