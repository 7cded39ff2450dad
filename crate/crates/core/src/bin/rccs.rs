fn main() {
    let out = rccs::cli::run(std::env::args().collect());
    if out.stderr {
        eprint!("{}", out.text);
    } else {
        print!("{}", out.text);
    }
    std::process::exit(out.code);
}
