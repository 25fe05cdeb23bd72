fn main() {
    std::process::exit(nbx_cli::main_with(std::env::args_os().skip(1)));
}
