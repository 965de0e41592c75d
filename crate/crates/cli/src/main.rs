fn main() {
    std::process::exit(geobundle_cli::main_with(std::env::args_os()));
}
