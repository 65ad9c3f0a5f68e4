use crate::analysis::{capsnet_param_count, line_wars_representations, repr_data_size, CapsNetCount, CapsNetSpec};
use crate::env::ObsMode;
use crate::error::Result;

/// Where reported numbers come from. Swappable so a wrong calculator can be
/// shown to fail the report.
pub trait TableSource {
    fn capsnet(&self, spec: &CapsNetSpec) -> Result<CapsNetCount>;
    fn repr_size(&self, mode: ObsMode, dims: [usize; 3]) -> Result<u64>;
}

/// The closed-form calculators in [`crate::analysis`].
#[derive(Debug, Clone, Copy, Default)]
pub struct Analytic;

impl TableSource for Analytic {
    fn capsnet(&self, spec: &CapsNetSpec) -> Result<CapsNetCount> {
        capsnet_param_count(spec)
    }

    fn repr_size(&self, mode: ObsMode, dims: [usize; 3]) -> Result<u64> {
        repr_data_size(mode, dims[0], dims[1], dims[2])
    }
}

/// Expected capsule network counts: (input size, layer, parameters).
pub const CAPSNET_REFERENCE: [(usize, &str, u64); 6] = [
    (28, "conv", 20_992),
    (28, "primary_caps", 5_308_672),
    (28, "capsule_layer", 2_359_296),
    (28, "total", 7_688_960),
    (84, "capsule_layer", 75_759_616),
    (84, "total", 81_089_280),
];

/// Expected Deep Line Wars data sizes per representation.
pub const REPR_REFERENCE: [(ObsMode, u64); 4] = [
    (ObsMode::RawImage, 1_440_000),
    (ObsMode::Matrix, 750),
    (ObsMode::HeatmapRgb, 450),
    (ObsMode::HeatmapGray, 150),
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableCheck {
    pub group: &'static str,
    pub name: String,
    pub expected: u64,
    pub computed: u64,
}

impl TableCheck {
    pub fn pass(&self) -> bool {
        self.expected == self.computed
    }
}

fn pick(c: &CapsNetCount, layer: &str) -> u64 {
    match layer {
        "conv" => c.conv,
        "primary_caps" => c.primary_caps,
        "capsule_layer" => c.capsule_layer,
        _ => c.total,
    }
}

pub fn report_tables_with(source: &dyn TableSource) -> Result<Vec<TableCheck>> {
    let mut out = Vec::new();
    for (size, layer, expected) in CAPSNET_REFERENCE {
        let c = source.capsnet(&CapsNetSpec::square(size, 1))?;
        out.push(TableCheck {
            group: "capsnet_params",
            name: format!("{size}x{size}x1 {layer}"),
            expected,
            computed: pick(&c, layer),
        });
    }
    let dims = line_wars_representations();
    for (mode, expected) in REPR_REFERENCE {
        let d = dims.iter().find(|(m, _, _)| *m == mode).map(|(_, d, _)| *d).expect("mode listed");
        out.push(TableCheck {
            group: "repr_data_size",
            name: format!("{} {}x{}x{}", mode.name(), d[0], d[1], d[2]),
            expected,
            computed: source.repr_size(mode, d)?,
        });
    }
    Ok(out)
}

pub fn report_tables() -> Result<Vec<TableCheck>> {
    report_tables_with(&Analytic)
}

pub fn all_pass(checks: &[TableCheck]) -> bool {
    checks.iter().all(TableCheck::pass)
}

pub fn render_checks(checks: &[TableCheck], as_csv: bool) -> Result<String> {
    if as_csv {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["group", "name", "expected", "computed", "status"])?;
        for c in checks {
            let status = if c.pass() { "PASS" } else { "FAIL" };
            w.write_record([c.group, &c.name, &c.expected.to_string(), &c.computed.to_string(), status])?;
        }
        let bytes = w.into_inner().map_err(|e| crate::error::Error::Io(e.to_string()))?;
        return Ok(String::from_utf8(bytes).expect("csv is utf-8"));
    }
    let mut out = String::new();
    for c in checks {
        let status = if c.pass() { "PASS" } else { "FAIL" };
        out += &format!("{status}  {:<15} {:<28} expected {:>12}  computed {:>12}\n", c.group, c.name, c.expected, c.computed);
    }
    let passed = checks.iter().filter(|c| c.pass()).count();
    out += &format!("{passed}/{} PASS\n", checks.len());
    Ok(out)
}
