fn main() {
    // Populated once the experiment layer lands.
    eprintln!("obslab CLI: not wired up yet");
    std::process::exit(2);
}
