fn main() {
    std::process::exit(dissipnet_cli::main_with(std::env::args_os()));
}
