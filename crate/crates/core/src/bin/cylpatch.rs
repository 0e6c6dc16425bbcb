fn main() {
    std::process::exit(cylpatch::expcli::main_with_args(std::env::args_os()));
}
