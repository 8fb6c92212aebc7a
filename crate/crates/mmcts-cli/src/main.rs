fn main() {
    println!("mmcts");
}
