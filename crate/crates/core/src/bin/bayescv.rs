fn main() {
    std::process::exit(bayescv::cli::main_with_args(std::env::args_os()));
}
