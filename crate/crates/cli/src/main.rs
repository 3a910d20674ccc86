fn main() {
    std::process::exit(bhlab::run(std::env::args_os()));
}
