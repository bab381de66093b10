fn main() {
    std::process::exit(dampwave::expcli::main_with(std::env::args_os()));
}
