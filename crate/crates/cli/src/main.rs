use std::process::exit;

fn main() {
    exit(lecforge::run(std::env::args()));
}
