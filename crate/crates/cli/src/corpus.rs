use anyhow::Result;
use sublab::corpus::builtin_corpus;

pub fn run() -> Result<bool> {
    for f in builtin_corpus() {
        let params = f.params(&Default::default());
        let defaults: Vec<String> = params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        println!("{}", f.name);
        println!("  map         {}", f.description);
        if !defaults.is_empty() {
            println!("  defaults    {}", defaults.join(" "));
        }
        for r in &f.ranges {
            let (l, h) = if r.open { ('(', ')') } else { ('[', ']') };
            println!("  range       {} ∈ {l}{}, {}{h}", r.name, r.lo, r.hi);
        }
        println!("  verdict     {}", f.expected_verdict(&params));
        println!("  theta       {}", f.expected.theta_formula);
        if !f.expected_failures.is_empty() {
            println!("  fails       {}", f.expected_failures.join(", "));
        }
        println!("  provenance  {}", f.expected.provenance.as_str());
    }
    Ok(true)
}
