//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line per
//! criterion and exits non-zero if any failed.

#[path = "../../core/tests/support/particles.rs"]
mod particles;

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command as Process, Output, Stdio};
use std::time::{Duration, Instant};

use chrono::{Datelike, NaiveDate};
use particles::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use xmlward::args::{Command, LimitOverride};
use xmlward::parse_args;
use xmlward_core::content::{check_upa, compile_particle, glushkov_compile, normalize_occurs, ContentAutomaton};
use xmlward_core::diag::DiagCode;
use xmlward_core::limits::Limits;
use xmlward_core::pipeline::{check_document, compile_schema_bytes, DocOutcome};
use xmlward_core::simple::{parse_pattern, CompiledPattern};
use xmlward_core::xml::parse_document;

const BIN: &str = env!("CARGO_BIN_EXE_xmlward");

type Outcome = Result<String, String>;

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("mandated rejections", c1_mandated_rejections),
        ("totality fuzz", c2_totality_fuzz),
        ("content-model oracle", c3_content_oracle),
        ("UPA oracle", c4_upa_oracle),
        ("linear-time patterns", c5_linear_patterns),
        ("golden corpus", c6_golden_corpus),
        ("determinism", c7_determinism),
        ("depth bomb", c8_depth_bomb),
        ("CLI strictness", c9_cli_strictness),
        ("simple types", c10_simple_types),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS criterion {:>2} {name}: {detail} ({secs:.2}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {:>2} {name}: {why} ({secs:.2}s)", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of 10 criteria failed");
        std::process::exit(1);
    }
    println!("all 10 criteria passed");
}

fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/corpus")
}

fn run_bin(args: &[&str], cwd: &Path, stdin: &[u8]) -> Output {
    let mut child = Process::new(BIN)
        .args(args)
        .current_dir(cwd)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary starts");
    // The child may exit before reading everything; that is not an error here.
    let _ = child.stdin.take().unwrap().write_all(stdin);
    child.wait_with_output().expect("binary finishes")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn sorted_files(dir: &Path, ext: &str) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == ext))
        .collect();
    v.sort();
    v
}

struct GoldenSet {
    dir: PathBuf,
    docs: Vec<PathBuf>,
}

fn golden() -> Vec<GoldenSet> {
    let root = corpus_dir().join("golden");
    let mut dirs: Vec<PathBuf> = fs::read_dir(&root).unwrap().map(|e| e.unwrap().path()).collect();
    dirs.sort();
    dirs.into_iter()
        .map(|dir| GoldenSet {
            docs: sorted_files(&dir, "xml"),
            dir,
        })
        .collect()
}

fn name(p: &Path) -> &str {
    p.file_name().unwrap().to_str().unwrap()
}

// 1

fn c1_mandated_rejections() -> Outcome {
    let root = corpus_dir().join("rejection");
    let docs_dir = root.join("docs");
    let schemas_dir = root.join("schemas");
    let docs = sorted_files(&docs_dir, "xml");
    let schemas = sorted_files(&schemas_dir, "xsd");
    let start = Instant::now();
    let mut bad = Vec::new();
    for d in &docs {
        let o = run_bin(&["validate", "--schema", "schema.xsd", name(d)], &docs_dir, b"");
        let err = stderr(&o);
        if code(&o) != 2 || !err.starts_with("WF001\t") || err.lines().count() != 1 {
            bad.push(format!("{}: exit {} {err:?}", name(d), code(&o)));
        }
    }
    for s in &schemas {
        let o = run_bin(&["validate", "--schema", name(s), "doc.xml"], &schemas_dir, b"");
        let err = stderr(&o);
        if code(&o) != 3 || !o.stdout.is_empty() || !err.lines().any(|l| l.starts_with("SCH001\t")) {
            bad.push(format!("{}: exit {} {err:?}", name(s), code(&o)));
        }
    }
    let elapsed = start.elapsed();
    let total = docs.len() + schemas.len();
    if total != 50 || docs.is_empty() || schemas.is_empty() {
        return Err(format!("corpus has {} documents and {} schemas", docs.len(), schemas.len()));
    }
    if !bad.is_empty() {
        return Err(format!("{} of {total} cases wrong; first: {}", bad.len(), bad[0]));
    }
    if elapsed > Duration::from_secs(1) {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(format!("{total}/{total} rejected in {} ms", elapsed.as_millis()))
}

// 2

const FUZZ_INPUTS: usize = 10_000;
const FUZZ_SEED: u64 = 0x5eed_0002;

const TOKENS: &[&[u8]] = &[
    b"<", b">", b"</", b"/>", b"&", b";", b"&#115;", b"&#x73;", b"&amp;", b"&bogus;", b"<!DOCTYPE a [<!ENTITY e \"x\">]>",
    b"<![CDATA[", b"]]>", b"<!--", b"-->", b"<?", b"?>", b"=\"", b"\"", b"'", b"xmlns:p=\"u\"", b"p:", b"\x00",
    b"\xff", b"\xc3", b"\xef\xbb\xbf", b" ", b"\n", b"<a>", b"</a>", b"<xs:any/>", b"<xs:element name=\"", b"minOccurs=\"",
    b"maxOccurs=\"unbounded\"", b"99999999999999999999", b"-1", b"type=\"xs:integer\"", b"<xs:pattern value=\"",
    b"(a+)+", b"\\p{L}", b"[", b"]", b"{2,", b"ref=\"", b"<xs:simpleType>", b"<xs:all>", b"xsi:type=\"t\"",
];

struct FuzzCase {
    schema: PathBuf,
    doc: Vec<u8>,
}

fn mutate(rng: &mut StdRng, input: &[u8]) -> Vec<u8> {
    let mut v = input.to_vec();
    for _ in 0..rng.gen_range(1..=8) {
        let at = if v.is_empty() { 0 } else { rng.gen_range(0..=v.len()) };
        match rng.gen_range(0..7) {
            0 if at < v.len() => v[at] = rng.gen(),
            1 if at < v.len() => {
                v.remove(at);
            }
            2 => v.insert(at, rng.gen()),
            3 => {
                let t = TOKENS[rng.gen_range(0..TOKENS.len())];
                v.splice(at..at, t.iter().copied());
            }
            4 if !v.is_empty() => {
                let from = rng.gen_range(0..v.len());
                let len = rng.gen_range(0..=(v.len() - from).min(64));
                let chunk: Vec<u8> = v[from..from + len].to_vec();
                let times = rng.gen_range(1..=20);
                for _ in 0..times {
                    v.splice(at..at, chunk.iter().copied());
                }
            }
            5 => v.truncate(at),
            _ if at < v.len() => v[at] ^= 1 << rng.gen_range(0..8),
            _ => {}
        }
    }
    v
}

fn fuzz_case(i: usize, sets: &[GoldenSet], scratch: &Path) -> FuzzCase {
    let mut rng = StdRng::seed_from_u64(FUZZ_SEED ^ (i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let set = &sets[rng.gen_range(0..sets.len())];
    let schema = set.dir.join("schema.xsd");
    let valid = fs::read(&set.docs[rng.gen_range(0..set.docs.len())]).unwrap();
    match rng.gen_range(0..100) {
        0..=44 => FuzzCase {
            doc: mutate(&mut rng, &valid),
            schema,
        },
        45..=59 => {
            let len = rng.gen_range(0..2048);
            FuzzCase {
                doc: (0..len).map(|_| rng.gen()).collect(),
                schema,
            }
        }
        60..=69 => {
            let mut doc = Vec::new();
            for _ in 0..rng.gen_range(0..200) {
                doc.extend_from_slice(TOKENS[rng.gen_range(0..TOKENS.len())]);
            }
            FuzzCase { doc, schema }
        }
        _ => {
            let mutated = mutate(&mut rng, &fs::read(&schema).unwrap());
            let path = scratch.join(format!("s{i}.xsd"));
            fs::write(&path, mutated).unwrap();
            FuzzCase { schema: path, doc: valid }
        }
    }
}

fn run_fuzz_case(case: &FuzzCase, cwd: &Path) -> (Output, Duration) {
    let schema = case.schema.to_str().unwrap();
    let start = Instant::now();
    let o = run_bin(&["validate", "--schema", schema, "-"], cwd, &case.doc);
    (o, start.elapsed())
}

fn c2_totality_fuzz() -> Outcome {
    let sets = golden();
    let scratch = tempfile::tempdir().unwrap();
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).clamp(1, 4);
    let results: Vec<Vec<(usize, i32, bool, Duration)>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let sets = &sets;
                let scratch = scratch.path();
                s.spawn(move || {
                    (w..FUZZ_INPUTS)
                        .step_by(workers)
                        .map(|i| {
                            let case = fuzz_case(i, sets, scratch);
                            let (o, t) = run_fuzz_case(&case, scratch);
                            let c = code(&o);
                            let out = String::from_utf8_lossy(&o.stdout);
                            let clean = !stderr(&o).contains("internal error")
                                && match c {
                                    3 | 5 if out.is_empty() => true,
                                    0 => out == "-\tVALID\n",
                                    1 | 2 | 5 => out == "-\tINVALID\n",
                                    _ => false,
                                };
                            (i, c, clean, t)
                        })
                        .collect()
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut by_code = BTreeMap::new();
    let mut slow = Vec::new();
    let mut max_time = Duration::ZERO;
    for (i, c, clean, t) in results.into_iter().flatten() {
        *by_code.entry(c).or_insert(0usize) += 1;
        if !matches!(c, 0 | 1 | 2 | 3 | 5) || !clean {
            return Err(format!("input {i}: exit {c}"));
        }
        if t > Duration::from_millis(100) {
            slow.push(i);
        }
        max_time = max_time.max(t);
    }
    // Runs that were slow under parallel load are timed again on their own.
    let mut retimed_max = Duration::ZERO;
    for &i in &slow {
        let case = fuzz_case(i, &sets, scratch.path());
        let best = (0..3).map(|_| run_fuzz_case(&case, scratch.path()).1).min().unwrap();
        if best > Duration::from_millis(100) {
            return Err(format!("input {i} takes {best:?}"));
        }
        retimed_max = retimed_max.max(best);
    }
    let codes: Vec<String> = by_code.iter().map(|(c, n)| format!("{c}:{n}")).collect();
    Ok(format!(
        "{FUZZ_INPUTS} inputs, exits {{{}}}, max {} ms ({} re-timed, max {} ms)",
        codes.join(" "),
        max_time.as_millis(),
        slow.len(),
        retimed_max.as_millis()
    ))
}

// 3, 4

const PARTICLES: usize = 1000;
const PARTICLE_SEED: u64 = 0x5eed_0003;

fn particle_corpus() -> Vec<xmlward_core::xsd::ResolvedParticle> {
    let mut rng = StdRng::seed_from_u64(PARTICLE_SEED);
    (0..PARTICLES).map(|_| random_particle(&mut rng, 4)).collect()
}

/// Determinized without the UPA gate and with room for ambiguous models.
fn automaton(p: &xmlward_core::xsd::ResolvedParticle) -> ContentAutomaton {
    let limits = Limits {
        max_automaton_states: 1 << 22,
        ..Limits::default()
    };
    let n = normalize_occurs(p, &schema_abc(), &limits).expect("normalizes");
    glushkov_compile(&n, &limits, &p.loc).expect("compiles")
}

fn accepts(auto: &ContentAutomaton, word: &[&str]) -> bool {
    let mut state = auto.start;
    for s in word {
        match auto.step(state, s) {
            Some(t) => state = t.target,
            None => return false,
        }
    }
    auto.is_accepting(state)
}

fn c3_content_oracle() -> Outcome {
    let words = all_words(6);
    let mut checked = 0usize;
    let mut accepted = 0usize;
    for (i, p) in particle_corpus().iter().enumerate() {
        let auto = automaton(p);
        for w in &words {
            let got = accepts(&auto, w);
            if got != interpret(p, w) {
                return Err(format!("particle {i} on {w:?}: automaton says {got}"));
            }
            checked += 1;
            accepted += usize::from(got);
        }
    }
    Ok(format!(
        "{PARTICLES} particles x {} words = {checked} verdicts agree ({accepted} accepted)",
        words.len()
    ))
}

fn c4_upa_oracle() -> Outcome {
    let rs = schema_abc();
    let mut violations = 0;
    for (i, p) in particle_corpus().iter().enumerate() {
        let oracle = upa_oracle(p).is_some();
        let upa = check_upa(&automaton(p)).is_err();
        if upa != oracle {
            return Err(format!("particle {i}: check_upa {upa}, oracle {oracle}"));
        }
        let compiled = compile_particle(p, &rs, &Limits::default());
        match (&compiled, oracle) {
            (Ok(_), false) => {}
            (Err(e), true) if e.code == DiagCode::Sch004 => {}
            _ => return Err(format!("particle {i}: compile gives {:?}, oracle {oracle}", compiled.err().map(|e| e.code))),
        }
        violations += usize::from(oracle);
    }
    let one = occurs(1, Some(1));
    let canonical = [
        choice(
            vec![seq(vec![elem("a", one), elem("b", one)], one), seq(vec![elem("a", one), elem("c", one)], one)],
            one,
        ),
        seq(vec![elem("a", occurs(0, Some(1))), elem("a", one)], one),
    ];
    for (k, mut p) in canonical.into_iter().enumerate() {
        number_lines(&mut p);
        match compile_particle(&p, &rs, &Limits::default()) {
            Err(e) if e.code == DiagCode::Sch004 && upa_oracle(&p).is_some() => {}
            other => return Err(format!("canonical case {k}: {:?}", other.map(|_| ()).map_err(|e| e.code))),
        }
    }
    Ok(format!("{PARTICLES} particles agree ({violations} violations), both canonical cases give SCH004"))
}

// 5

fn time_match(p: &CompiledPattern, value: &str) -> (bool, Duration) {
    let mut best = Duration::MAX;
    let mut result = false;
    for _ in 0..15 {
        let start = Instant::now();
        result = std::hint::black_box(p.matches(std::hint::black_box(value)));
        best = best.min(start.elapsed());
    }
    (result, best)
}

fn c5_linear_patterns() -> Outcome {
    let limits = Limits::default();
    let ast = parse_pattern("(a+)+", &limits).map_err(|e| e.to_string())?;
    let p = CompiledPattern::compile(&ast, &limits).map_err(|e| e.to_string())?;
    let probe = format!("{}X", "a".repeat(10_000));
    let start = Instant::now();
    let matched = p.matches(&probe);
    let first = start.elapsed();
    if matched {
        return Err("(a+)+ matched a string ending in X".into());
    }
    if first > Duration::from_millis(50) {
        return Err(format!("a^10000 X took {first:?}"));
    }
    let (m1, t1) = time_match(&p, &"a".repeat(1_000));
    let (m2, t2) = time_match(&p, &"a".repeat(10_000));
    if !m1 || !m2 {
        return Err("(a+)+ rejected a run of a".into());
    }
    let ratio = t2.as_secs_f64() / t1.as_secs_f64().max(1e-9);
    if ratio > 30.0 {
        return Err(format!("N=1000 {t1:?}, N=10000 {t2:?}, ratio {ratio:.1} > 30"));
    }
    Ok(format!(
        "a^10000 X rejected in {} us; N=1000 {} us, N=10000 {} us, ratio {ratio:.1} (limit 30)",
        first.as_micros(),
        t1.as_micros(),
        t2.as_micros()
    ))
}

// 6

fn c6_golden_corpus() -> Outcome {
    let sets = golden();
    let mut pairs = 0;
    for set in &sets {
        for doc in &set.docs {
            let o = run_bin(&["validate", "--schema", "schema.xsd", name(doc)], &set.dir, b"");
            let expected = format!("{}\tVALID\n", name(doc));
            if code(&o) != 0 || o.stdout != expected.as_bytes() || !o.stderr.is_empty() {
                return Err(format!("{}/{}: exit {} {}", name(&set.dir), name(doc), code(&o), stderr(&o)));
            }
            pairs += 1;
        }
    }
    if pairs < 100 {
        return Err(format!("only {pairs} pairs"));
    }
    Ok(format!("{pairs} pairs over {} schemas, all VALID with exit 0", sets.len()))
}

// 7

fn without_time(report: &[u8]) -> Vec<u8> {
    let text = String::from_utf8_lossy(report);
    text.lines()
        .filter(|l| !l.starts_with("time "))
        .collect::<Vec<_>>()
        .join("\n")
        .into_bytes()
}

fn c7_determinism() -> Outcome {
    let scratch = tempfile::tempdir().unwrap();
    let report = scratch.path().join("report.txt");
    let report_arg = report.to_str().unwrap();
    let mut runs: Vec<(PathBuf, Vec<String>)> = Vec::new();
    for set in golden() {
        let mut args = vec!["validate".to_string(), "--schema".into(), "schema.xsd".into()];
        args.extend(set.docs.iter().map(|d| name(d).to_string()));
        runs.push((set.dir, args));
    }
    let rejection = corpus_dir().join("rejection");
    let mut args = vec!["validate".to_string(), "--schema".into(), "schema.xsd".into()];
    args.extend(sorted_files(&rejection.join("docs"), "xml").iter().map(|d| name(d).to_string()));
    runs.push((rejection.join("docs"), args));
    for s in sorted_files(&rejection.join("schemas"), "xsd") {
        runs.push((
            rejection.join("schemas"),
            vec!["validate".into(), "--schema".into(), name(&s).into(), "doc.xml".into()],
        ));
    }
    let mut streams = 0;
    for (dir, mut args) in runs.iter().cloned() {
        args.insert(3, "--report".into());
        args.insert(4, report_arg.into());
        let argv: Vec<&str> = args.iter().map(String::as_str).collect();
        let a = run_bin(&argv, &dir, b"");
        let ra = fs::read(&report).map_err(|e| e.to_string())?;
        let b = run_bin(&argv, &dir, b"");
        let rb = fs::read(&report).map_err(|e| e.to_string())?;
        if a.stdout != b.stdout || a.stderr != b.stderr || code(&a) != code(&b) {
            return Err(format!("streams differ for {args:?}"));
        }
        if without_time(&ra) != without_time(&rb) {
            return Err(format!("reports differ for {args:?}"));
        }
        let time_lines = String::from_utf8_lossy(&ra).lines().filter(|l| l.starts_with("time ")).count();
        if time_lines != 1 {
            return Err("report must have exactly one time line".into());
        }
        streams += 1;
    }
    Ok(format!("{streams} corpus runs repeated: stdout, stderr and reports identical"))
}

// 8

fn c8_depth_bomb() -> Outcome {
    const DEPTH: usize = 1_000_000;
    let mut doc = "<a>".repeat(DEPTH);
    doc.push_str(&"</a>".repeat(DEPTH));
    let scratch = tempfile::tempdir().unwrap();
    fs::write(scratch.path().join("bomb.xml"), &doc).unwrap();
    fs::write(
        scratch.path().join("s.xsd"),
        r#"<xs:schema xmlns:xs="http://www.w3.org/2001/XMLSchema"><xs:element name="a" type="xs:string"/></xs:schema>"#,
    )
    .unwrap();
    let start = Instant::now();
    let o = run_bin(&["validate", "--schema", "s.xsd", "bomb.xml"], scratch.path(), b"");
    let elapsed = start.elapsed();
    let err = stderr(&o);
    if code(&o) != 2 || !err.starts_with("LIM001\t") {
        return Err(format!("exit {} {err:?}", code(&o)));
    }
    if elapsed > Duration::from_secs(1) {
        return Err(format!("took {elapsed:?}"));
    }
    // Parsing on a small stack shows that nothing recurses per level.
    let bytes = doc.into_bytes();
    let parsed = std::thread::Builder::new()
        .stack_size(256 * 1024)
        .spawn(move || parse_document(&bytes, &Limits::default()).map(|_| ()).map_err(|e| e.to_diagnostic().code))
        .unwrap()
        .join()
        .map_err(|_| "parser thread died on a 256 KiB stack".to_string())?;
    if parsed != Err(DiagCode::Lim001) {
        return Err(format!("in-process parse gave {parsed:?}"));
    }
    Ok(format!("LIM001, exit 2 in {} ms; parser fits a 256 KiB stack", elapsed.as_millis()))
}

// 9

#[derive(Clone, Copy, PartialEq, Debug)]
enum Role {
    Fixed,
    Schema,
    Report,
    Doc(usize),
    Limit,
}

struct Line {
    argv: Vec<&'static str>,
    roles: Vec<Role>,
}

fn line(tokens: &[(&'static str, Role)]) -> Line {
    Line {
        argv: tokens.iter().map(|t| t.0).collect(),
        roles: tokens.iter().map(|t| t.1).collect(),
    }
}

fn base_lines() -> Vec<Line> {
    use Role::*;
    vec![
        line(&[("validate", Fixed), ("--schema", Fixed), ("s.xsd", Schema), ("d.xml", Doc(0))]),
        line(&[("check-schema", Fixed), ("schema.xsd", Schema)]),
        line(&[("check-schema", Fixed), ("--", Fixed), ("-s.xsd", Schema)]),
        line(&[("--version", Fixed)]),
        line(&[("--help", Fixed)]),
        line(&[("validate", Fixed), ("--schema", Fixed), ("s.xsd", Schema), ("-", Doc(0))]),
        line(&[
            ("validate", Fixed),
            ("--schema", Fixed),
            ("a.xsd", Schema),
            ("--report", Fixed),
            ("out.txt", Report),
            ("one.xml", Doc(0)),
            ("two.xml", Doc(1)),
        ]),
        line(&[
            ("validate", Fixed),
            ("--report", Fixed),
            ("r", Report),
            ("--limit", Fixed),
            ("max_depth=100", Limit),
            ("--schema", Fixed),
            ("x", Schema),
            ("y", Doc(0)),
        ]),
        line(&[
            ("validate", Fixed),
            ("--schema", Fixed),
            ("s.xsd", Schema),
            ("--limit-unsafe", Fixed),
            ("max_total_nodes=5000000", Limit),
            ("--limit", Fixed),
            ("max_depth=64", Limit),
            ("--", Fixed),
            ("-d.xml", Doc(0)),
            ("--", Doc(1)),
        ]),
        line(&[
            ("validate", Fixed),
            ("--schema", Fixed),
            ("dir/schema file.xsd", Schema),
            ("--", Fixed),
            ("a.xml", Doc(0)),
            ("b.xml", Doc(1)),
            ("c.xml", Doc(2)),
        ]),
        line(&[
            ("validate", Fixed),
            ("--limit", Fixed),
            ("max_input_bytes=1000", Limit),
            ("--schema", Fixed),
            ("s", Schema),
            ("d1", Doc(0)),
            ("d2", Doc(1)),
        ]),
    ]
}

/// The command the mutated line should produce if the edited token keeps
/// its role: the original command with that one value replaced.
fn expected_with(original: &Command, role: Role, original_token: &str, mutated: &str) -> Option<Command> {
    let mut cmd = original.clone();
    match (&mut cmd, role) {
        (Command::CheckSchema { schema }, Role::Schema) => *schema = mutated.to_string(),
        (Command::Validate(v), Role::Schema) => v.schema = mutated.to_string(),
        (Command::Validate(v), Role::Report) => v.report = Some(mutated.to_string()),
        (Command::Validate(v), Role::Doc(i)) => v.docs[i] = mutated.to_string(),
        (Command::Validate(v), Role::Limit) => {
            let old = original_token.split('=').next()?;
            let raised = v.overrides.remove(old)?.raised;
            let (name, value) = mutated.split_once('=')?;
            let name = *Limits::NAMES.iter().find(|n| **n == name)?;
            if value.is_empty() || !value.bytes().all(|b| b.is_ascii_digit()) {
                return None;
            }
            let value: u64 = value.parse().ok()?;
            v.overrides.insert(name, LimitOverride { value, raised });
        }
        _ => return None,
    }
    Some(cmd)
}

const MUTATION_CHARS: &[char] = &[
    '-', '-', '-', '=', '=', ' ', 'a', 'e', 's', 'x', 'm', 'l', '.', '/', '0', '1', '9', '_', 'h', 'r', 't', 'S', '\t', 'é',
];

fn mutate_token(rng: &mut StdRng, token: &str) -> String {
    let mut chars: Vec<char> = token.chars().collect();
    let random_char = |rng: &mut StdRng| {
        if rng.gen_bool(0.7) {
            MUTATION_CHARS[rng.gen_range(0..MUTATION_CHARS.len())]
        } else {
            char::from(rng.gen_range(0x20u8..0x7f))
        }
    };
    match rng.gen_range(0..3) {
        0 if !chars.is_empty() => {
            let at = rng.gen_range(0..chars.len());
            chars[at] = random_char(rng);
        }
        1 if !chars.is_empty() => {
            chars.remove(rng.gen_range(0..chars.len()));
        }
        _ => {
            let at = rng.gen_range(0..=chars.len());
            chars.insert(at, random_char(rng));
        }
    }
    chars.into_iter().collect()
}

fn c9_cli_strictness() -> Outcome {
    const MUTATIONS: usize = 10_000;
    let lines = base_lines();
    let originals: Vec<Command> = lines
        .iter()
        .map(|l| parse_args(&l.argv).map_err(|e| format!("{:?}: {e}", l.argv)))
        .collect::<Result<_, _>>()?;
    // Roles must describe the parsed commands.
    for (l, cmd) in lines.iter().zip(&originals) {
        for (token, role) in l.argv.iter().zip(&l.roles) {
            let same = expected_with(cmd, *role, token, token);
            if *role != Role::Fixed && same.as_ref() != Some(cmd) {
                return Err(format!("role table wrong for {token:?} in {:?}", l.argv));
            }
        }
    }
    let mut rng = StdRng::seed_from_u64(0x5eed_0009);
    let (mut rejected, mut same, mut value_edits, mut unchanged) = (0, 0, 0, 0);
    for _ in 0..MUTATIONS {
        let k = rng.gen_range(0..lines.len());
        let (l, original) = (&lines[k], &originals[k]);
        let t = rng.gen_range(0..l.argv.len());
        let mutated = mutate_token(&mut rng, l.argv[t]);
        if mutated == l.argv[t] {
            unchanged += 1;
        }
        let mut argv: Vec<&str> = l.argv.clone();
        argv[t] = &mutated;
        match parse_args(&argv) {
            Err(_) => rejected += 1,
            Ok(cmd) if cmd == *original => same += 1,
            Ok(cmd) => {
                if expected_with(original, l.roles[t], l.argv[t], &mutated).as_ref() == Some(&cmd) {
                    value_edits += 1;
                } else {
                    return Err(format!("{argv:?} silently parsed as {cmd:?}"));
                }
            }
        }
    }
    Ok(format!(
        "{MUTATIONS} mutations: {rejected} usage errors, {same} same command ({unchanged} no-op edits), \
         {value_edits} edits of an operand value taken verbatim, 0 misparses"
    ))
}

// 10

/// Whitespace the XML parser and the facet pipeline treat as such.
fn xml_ws(c: char) -> bool {
    matches!(c, ' ' | '\t' | '\n' | '\r')
}

fn collapse(s: &str) -> String {
    s.split(xml_ws).filter(|p| !p.is_empty()).collect::<Vec<_>>().join(" ")
}

/// Fixed-point value scaled by 10^9, parsed by hand from the lexical form.
fn scaled(s: &str) -> Option<i128> {
    let s = s.trim_matches(xml_ws);
    let (neg, body) = match s.as_bytes().first()? {
        b'-' => (true, &s[1..]),
        b'+' => (false, &s[1..]),
        _ => (false, s),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) || frac.len() > 9 {
        return None;
    }
    let int: i128 = if int.is_empty() { 0 } else { int.parse().ok()? };
    let frac: i128 = format!("{frac:0<9}").parse().ok()?;
    let v = int * 1_000_000_000 + frac;
    Some(if neg { -v } else { v })
}

struct SimpleCase {
    ty: &'static str,
    value: String,
    expected: bool,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

const TYPES: &[(&str, &str)] = &[
    ("bool", r#"<xs:restriction base="xs:boolean"/>"#),
    ("date", r#"<xs:restriction base="xs:date"/>"#),
    ("dec", r#"<xs:restriction base="xs:decimal"><xs:minInclusive value="1.50"/><xs:maxExclusive value="100.0"/></xs:restriction>"#),
    ("decenum", r#"<xs:restriction base="xs:decimal"><xs:enumeration value="2.50"/><xs:enumeration value="0.125"/><xs:enumeration value="-3"/></xs:restriction>"#),
    ("int", r#"<xs:restriction base="xs:integer"><xs:minExclusive value="-5"/><xs:maxInclusive value="0010"/></xs:restriction>"#),
    ("len3", r#"<xs:restriction base="xs:string"><xs:length value="3"/></xs:restriction>"#),
    ("len24", r#"<xs:restriction base="xs:string"><xs:minLength value="2"/><xs:maxLength value="4"/></xs:restriction>"#),
    ("tok24", r#"<xs:restriction base="xs:token"><xs:minLength value="2"/><xs:maxLength value="4"/></xs:restriction>"#),
    ("feb", r#"<xs:restriction base="xs:date"><xs:minInclusive value="2000-02-28"/><xs:maxInclusive value="2000-03-01"/></xs:restriction>"#),
];

fn simple_cases() -> Vec<SimpleCase> {
    let mut rng = StdRng::seed_from_u64(0x5eed_0010);
    let mut cases = Vec::new();
    let mut add = |ty: &'static str, value: String, expected: bool| cases.push(SimpleCase { ty, value, expected });

    for v in [
        "true", "false", "1", "0", "TRUE", "True", "FALSE", "False", "yes", "no", "01", "", " true ", "\ttrue\n", "t", "2",
        "-0", "+1", "true false", "1.0", " 0", "false ", "on", "tRUE",
    ] {
        let t = v.trim_matches(xml_ws);
        add("bool", v.to_string(), matches!(t, "true" | "false" | "1" | "0"));
    }

    let years = [1, 4, 100, 1600, 1700, 1900, 1999, 2000, 2023, 2024, 2100, 2400, 9999];
    let zones = ["", "Z", "+05:30", "-14:00", "+14:00", "+14:01", "+15:00", "-00:00", "+5:30", "z"];
    for _ in 0..90 {
        let y = years[rng.gen_range(0..years.len())];
        let m = if rng.gen_bool(0.8) { rng.gen_range(1..=12) } else { rng.gen_range(0..=13) };
        let d = if rng.gen_bool(0.5) { rng.gen_range(27..=31) } else { rng.gen_range(0..=32) };
        let zone = if rng.gen_bool(0.7) { "" } else { zones[rng.gen_range(0..zones.len())] };
        let zone_ok = matches!(zone, "" | "Z" | "+05:30" | "-14:00" | "+14:00" | "-00:00");
        let date_ok = NaiveDate::from_ymd_opt(y, m, d).is_some();
        add("date", format!("{y:04}-{m:02}-{d:02}{zone}"), date_ok && zone_ok);
    }
    for v in ["2023-02-29", "1900-02-29", "2100-02-29", "2000-02-29", "2024-02-29", "0000-01-01", "10000-01-01", "2024-1-01", "2024-01-01T00:00:00"] {
        // XSD 1.0 has no year zero; chrono's proleptic calendar does.
        let ok = NaiveDate::parse_from_str(v, "%Y-%m-%d")
            .is_ok_and(|d| v.len() == 10 && d.year() >= 1 && d.format("%Y-%m-%d").to_string() == v);
        add("date", v.to_string(), ok);
    }
    for (v, ok) in [("2000-02-28", true), ("2000-02-29", true), ("2000-03-01", true), ("2000-02-27", false), ("2000-03-02", false)] {
        let day = NaiveDate::parse_from_str(v, "%Y-%m-%d").unwrap();
        let in_range = day >= NaiveDate::from_ymd_opt(2000, 2, 28).unwrap() && day <= NaiveDate::from_ymd_opt(2000, 3, 1).unwrap();
        assert_eq!(in_range, ok);
        add("feb", v.to_string(), in_range);
    }

    let lo = scaled("1.50").unwrap();
    let hi = scaled("100.0").unwrap();
    let enumerated = [scaled("2.50").unwrap(), scaled("0.125").unwrap(), scaled("-3").unwrap()];
    for _ in 0..80 {
        let cents: i64 = rng.gen_range(-400..12_000);
        let neg = cents < 0;
        let abs = cents.unsigned_abs();
        let mut text = format!("{}.{:02}", abs / 100, abs % 100);
        if rng.gen_bool(0.3) {
            text = format!("00{text}");
        }
        if rng.gen_bool(0.3) {
            text.push_str("000");
        }
        if rng.gen_bool(0.2) && text.ends_with("00") {
            text = text.trim_end_matches('0').to_string();
        }
        if text.starts_with("0.") && rng.gen_bool(0.5) {
            text = text[1..].to_string();
        }
        let sign = if neg { "-" } else if rng.gen_bool(0.2) { "+" } else { "" };
        let text = format!("{sign}{text}");
        let v = scaled(&text).unwrap();
        add("dec", text.clone(), v >= lo && v < hi);
        add("decenum", text, enumerated.contains(&v));
    }
    for v in ["2.5", "2.500000", "+02.50", "0.1250", ".125", "-3.000", "-03", "3", "0.12", "1.5", "1.49999", "100", "99.999", "abc", "1..5", "", "1e2", "- 3"] {
        let parsed = scaled(v);
        add("dec", v.to_string(), parsed.is_some_and(|x| x >= lo && x < hi));
        add("decenum", v.to_string(), parsed.is_some_and(|x| enumerated.contains(&x)));
    }

    for _ in 0..40 {
        let n: i64 = rng.gen_range(-12..=14);
        let mut text = n.abs().to_string();
        if rng.gen_bool(0.3) {
            text = format!("000{text}");
        }
        let sign = if n < 0 { "-" } else if rng.gen_bool(0.3) { "+" } else { "" };
        let text = format!("{sign}{text}");
        let v: i64 = text.parse().unwrap();
        add("int", text, v > -5 && v <= 10);
    }
    for v in ["1.0", "", "1e3", "- 1", "0x1", "--1", "+", "5 ", " 7", "99999999999999999999999", "-99999999999999999999999"] {
        let t = v.trim_matches(xml_ws);
        let ok = t.parse::<i128>().is_ok_and(|n| n > -5 && n <= 10);
        add("int", v.to_string(), ok);
    }

    let alphabet = ['a', 'Z', 'é', '日', '😀', ' ', '\t', '\n', '&', '<'];
    for _ in 0..60 {
        let len = rng.gen_range(0..7);
        let s: String = (0..len).map(|_| alphabet[rng.gen_range(0..alphabet.len())]).collect();
        let n = s.chars().count();
        add("len3", s.clone(), n == 3);
        add("len24", s.clone(), (2..=4).contains(&n));
        let c = collapse(&s).chars().count();
        add("tok24", s, (2..=4).contains(&c));
    }
    cases
}

fn c10_simple_types() -> Outcome {
    let mut schema = String::from(r#"<xs:schema xmlns:xs="http://www.w3.org/2001/XMLSchema">"#);
    for (name, body) in TYPES {
        schema.push_str(&format!(r#"<xs:simpleType name="{name}">{body}</xs:simpleType><xs:element name="{name}" type="{name}"/>"#));
    }
    schema.push_str("</xs:schema>");
    let limits = Limits::default();
    let cs = compile_schema_bytes(schema.as_bytes(), &limits).map_err(|d| format!("schema rejected: {d:?}"))?;
    let cases = simple_cases();
    let (mut valid, mut invalid) = (0, 0);
    for c in &cases {
        let doc = format!("<{0}>{1}</{0}>", c.ty, escape(&c.value));
        let got = match check_document(doc.as_bytes(), &cs, &limits) {
            DocOutcome::NotWellFormed(d) => return Err(format!("{doc:?} not well-formed: {}", d.to_line())),
            DocOutcome::Checked(v) => {
                if v.diagnostics().iter().any(|d| d.code != DiagCode::Val005) {
                    return Err(format!("{doc:?}: unexpected {:?}", v.diagnostics()));
                }
                v.is_valid()
            }
        };
        if got != c.expected {
            return Err(format!("{} {:?}: validator says {got}, expected {}", c.ty, c.value, c.expected));
        }
        if got {
            valid += 1;
        } else {
            invalid += 1;
        }
    }
    if cases.len() < 200 {
        return Err(format!("only {} cases", cases.len()));
    }
    Ok(format!("{} cases agree ({valid} valid, {invalid} invalid)", cases.len()))
}
