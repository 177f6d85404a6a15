//! Regenerates the standard suite data files:
//! `cargo run -p alterproj --example export_suite -- data/standard_suite`

use std::path::PathBuf;

use alterproj::instances::{self, SuiteClass};
use alterproj::schedules::ScheduleSpec;
use alterproj::schema;

fn main() {
    let out: PathBuf = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "data/standard_suite".into())
        .into();
    std::fs::create_dir_all(&out).expect("create output directory");
    let mut count = 0usize;
    for class in SuiteClass::ALL {
        for seed in instances::STANDARD_SUITE_SEEDS {
            let inst = instances::standard_suite_instance(class, 3, seed)
                .unwrap_or_else(|e| panic!("{} seed {seed}: {e}", class.name()));
            let k = inst.k();
            let json = schema::instance_to_json(&inst, ScheduleSpec::Random { k, seed });
            let path = out.join(format!("{}-s{seed:02}.json", class.name()));
            schema::write_instance(&path, &json).expect("write instance");
            count += 1;
        }
    }
    println!("wrote {count} instances to {}", out.display());
}
