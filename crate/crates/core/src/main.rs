fn main() {
    std::process::exit(freqbeam::cli::main_with_args(std::env::args_os()));
}
