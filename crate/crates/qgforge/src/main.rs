fn main() {
    println!("qgforge: work in progress");
}
