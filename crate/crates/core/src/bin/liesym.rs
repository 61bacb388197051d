fn main() {
    let (code, out) = liesym::cli::run(std::env::args_os());
    print!("{out}");
    std::process::exit(code);
}
