//! Driving the command-line front end from code and reading its JSON.

fn main() {
    let spec = concat!(env!("CARGO_MANIFEST_DIR"), "/specs/laplace_quadratic.spec");
    let (code, out) = liesym::cli::run(["liesym", "--format", "json", "relations", spec]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    println!("exit {code}, k = {}", v["payload"]["cases"][0]["k"]);
    for r in v["payload"]["cases"][0]["equations"].as_array().unwrap() {
        println!("  {}", r.as_str().unwrap());
    }
}
