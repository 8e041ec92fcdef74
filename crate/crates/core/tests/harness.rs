use proptest::prelude::*;
use sqlscope::harness::{
    build_prompts, build_repair_prompt, generate_with_retry, run_batch, success_table, Attempt, ChatMessage,
    GenerationRecord, GenerationTask, LlmError, PromptBundle, PromptError, Sampling, ScriptedLlm, ScriptedValidator,
    SqliteValidator, ValidationMode, Validator, ValidatorError, Verdict, RETRY_CONVENTION,
};

const FIXTURES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");

fn read(path: &str) -> String {
    std::fs::read_to_string(format!("{FIXTURES}/{path}")).unwrap()
}

fn bundle() -> PromptBundle {
    build_prompts("CREATE TABLE t(a INT);", "count rows of t").unwrap()
}

fn sampling() -> Sampling {
    Sampling { temperature: Some(0.0), top_p: None, max_tokens: Some(1024), seed: Some(1) }
}

#[test]
fn prompt_substitution() {
    let p = bundle();
    assert!(p.system.starts_with("You are a skilled PostgreSQL \nrelational database developer.\n"));
    assert!(p.system.contains("The database schema is:\nCREATE TABLE t(a INT);    \n"));
    assert_eq!(p.user, "User question:\ncount rows of t\n");

    let odd = "what's in {t}? say \"{{ question }}\" \\n";
    let p = build_prompts("CREATE TABLE t(a INT);", odd).unwrap();
    assert_eq!(p.user, format!("User question:\n{odd}\n"));
}

#[test]
fn tpcds_query1_prompts_match_golden() {
    let p = build_prompts(&read("tpcds/schema.sql"), read("prompts/query1.question.txt").trim_end()).unwrap();
    assert_eq!(p.system, read("prompts/query1.system.txt"));
    assert_eq!(p.user, read("prompts/query1.user.txt"));
}

#[test]
fn repair_prompts() {
    let p = build_repair_prompt("SELECT x FRO t", "syntax error at or near \"FRO\"").unwrap();
    assert_eq!(
        p,
        "Correct the query based on the error\nmessage.\n\nQuery:\nSELECT x FRO t\n\nError message:\nsyntax error at or near \"FRO\"\n"
    );
    let multi = "ERROR:  column \"x\" does not exist\nLINE 1: SELECT x FROM t\n               ^";
    assert!(build_repair_prompt("SELECT x FROM t", multi).unwrap().contains(&format!("Error message:\n{multi}\n")));

    // captured from a local SQLite engine
    let v = SqliteValidator::in_memory("CREATE TABLE t (a INT, b TEXT);", ValidationMode::Plan).unwrap();
    let err = v.validate("SELECT t.nope FROM t").unwrap().unwrap_err();
    assert_eq!(err, "no such column: t.nope");
    assert!(build_repair_prompt("SELECT t.nope FROM t", &err)
        .unwrap()
        .ends_with("Error message:\nno such column: t.nope\n"));

    assert_eq!(build_repair_prompt("", "e"), Err(PromptError::EmptyInput("SQL")));
}

#[test]
fn validator_examples() {
    let v = SqliteValidator::in_memory(&read("tpcds/schema.sql"), ValidationMode::default()).unwrap();
    assert_eq!(v.validate("SELECT 1").unwrap(), Ok(()));
    assert_eq!(v.validate("SELECT x FROM nonexistent_table").unwrap(), Err("no such table: nonexistent_table".into()));
    assert_eq!(v.validate("SELECT x FRO t").unwrap(), Err("near \"t\": syntax error".into()));
    assert_eq!(v.validate("SELECT d_year FROM date_dim WHERE d_moy = 11").unwrap(), Ok(()));
}

#[test]
fn valid_on_first_try() {
    let llm = ScriptedLlm::new("m", ["SELECT count(*) FROM t;"]);
    let val = ScriptedValidator::new([Ok(())]);
    let r = generate_with_retry(&llm, &val, "q1", &bundle(), 3, sampling());
    assert_eq!(r.attempts, [Attempt { sql: "SELECT count(*) FROM t".into(), error: None }]);
    assert!(r.success);
    assert_eq!(r.final_sql.as_deref(), Some("SELECT count(*) FROM t"));
    assert_eq!(r.retry_convention, RETRY_CONVENTION);
    assert_eq!(r.sampling, sampling());
}

#[test]
fn four_invalid_replies_exhaust_three_retries() {
    let llm = ScriptedLlm::new("m", ["SELECT 1", "SELECT 2", "SELECT 3", "SELECT 4", "SELECT 5"]);
    let val = ScriptedValidator::new((1..=5).map(|i| Err(format!("error {i}"))));
    let r = generate_with_retry(&llm, &val, "q1", &bundle(), 3, sampling());
    assert_eq!(r.attempts.len(), 4);
    assert!(!r.success);
    assert_eq!(r.final_sql, None);
    assert_eq!(r.failure, None);
    assert_eq!(llm.calls().len(), 4);
    assert_eq!(val.seen(), ["SELECT 1", "SELECT 2", "SELECT 3", "SELECT 4"]);
}

#[test]
fn invalid_then_valid() {
    let error = "ERROR:  column \"c_name\" does not exist\nLINE 1: SELECT c_name FROM customer\n               ^";
    let llm = ScriptedLlm::new("m", ["```sql\nSELECT c_name FROM customer;\n```", "SELECT c_last_name FROM customer"]);
    let val = ScriptedValidator::new([Err(error.to_string()), Ok(())]);
    let r = generate_with_retry(&llm, &val, "q1", &bundle(), 3, sampling());
    assert_eq!(r.attempts.len(), 2);
    assert!(r.success);
    assert_eq!(r.attempts[0].error.as_deref(), Some(error));

    let calls = llm.calls();
    let second = &calls[1];
    assert_eq!(second.len(), 4);
    assert_eq!(second[2], ChatMessage::assistant("```sql\nSELECT c_name FROM customer;\n```"));
    assert_eq!(second[3].role, "user");
    assert_eq!(second[3].content, build_repair_prompt("SELECT c_name FROM customer", error).unwrap());
    assert!(second[3].content.contains(error));
    assert_eq!(&r.transcript[..4], &second[..]);
}

#[test]
fn unavailable_services_are_not_retried() {
    let llm = ScriptedLlm::with_results("m", [Err(LlmError::Unavailable("connection refused".into()))]);
    let val = ScriptedValidator::new([]);
    let r = generate_with_retry(&llm, &val, "q1", &bundle(), 3, sampling());
    assert!(r.attempts.is_empty() && !r.success);
    assert_eq!(r.failure.as_deref(), Some("LLM unavailable: connection refused"));

    let llm = ScriptedLlm::new("m", ["SELECT 1", "SELECT 2"]);
    let val =
        ScriptedValidator::with_results([Ok(Err("bad".to_string())), Err(ValidatorError::Unavailable("down".into()))]);
    let r = generate_with_retry(&llm, &val, "q1", &bundle(), 3, sampling());
    assert_eq!(r.attempts.len(), 2);
    assert!(!r.success);
    assert_eq!(r.failure.as_deref(), Some("validator unavailable: down"));
    assert_eq!(llm.calls().len(), 2);
}

fn record(model: &str, id: usize, success: bool) -> GenerationRecord {
    let llm = ScriptedLlm::new(model, ["SELECT 1"]);
    let verdict: Verdict = if success { Ok(()) } else { Err("no".into()) };
    let val = ScriptedValidator::new([verdict]);
    generate_with_retry(&llm, &val, &format!("query{id}"), &bundle(), 0, Sampling::default())
}

#[test]
fn success_tables() {
    let records: Vec<GenerationRecord> = (1..=99).map(|i| record("gpt-4", i, i > 5)).collect();
    let t = success_table(&records);
    assert_eq!(t.row("gpt-4").as_deref(), Some("94 out of 99"));
    assert_eq!(t.to_csv(), "model,successes,total,summary\ngpt-4,94,99,94 out of 99\n");

    assert!(success_table(&[]).rows.is_empty());

    // a: q1 ok, q2 fail, q3 ok; b: q1 fail, q2 fail
    let mixed = [
        record("a", 1, true),
        record("b", 1, false),
        record("a", 2, false),
        record("b", 2, false),
        record("a", 3, true),
    ];
    let t = success_table(&mixed);
    assert_eq!(t.row("a").as_deref(), Some("2 out of 3"));
    assert_eq!(t.row("b").as_deref(), Some("0 out of 2"));
}

#[test]
fn records_are_byte_identical_across_runs() {
    let run = || {
        let llm = ScriptedLlm::new("m", ["SELECT a FROM t", "SELECT b FROM t", "SELECT a FROM t"]);
        let val = ScriptedValidator::new([Err("no such column: a".into()), Err("no such column: b".into()), Ok(())]);
        generate_with_retry(&llm, &val, "q7", &bundle(), 3, sampling()).to_json_pretty()
    };
    let first = run();
    assert_eq!(first, run());
    let parsed: GenerationRecord = serde_json::from_str(&first).unwrap();
    assert_eq!(parsed.attempts.len(), 3);
}

#[test]
fn batch_is_sorted_and_bounded() {
    struct Echo;
    impl sqlscope::harness::LlmClient for Echo {
        fn model(&self) -> &str {
            "echo"
        }
        fn complete(&self, messages: &[ChatMessage], _: &Sampling) -> Result<String, LlmError> {
            let q = messages[1].content.lines().nth(1).unwrap();
            Ok(format!("SELECT '{q}' AS q"))
        }
    }
    let v = SqliteValidator::in_memory("CREATE TABLE t (a INT);", ValidationMode::default()).unwrap();
    let tasks: Vec<GenerationTask> = (1..=20)
        .rev()
        .map(|i| GenerationTask { query_id: format!("q{i:02}"), question: format!("question {i}") })
        .collect();
    let records = run_batch(&Echo, &v, "CREATE TABLE t (a INT);", &tasks, 3, Sampling::default(), 4).unwrap();
    let ids: Vec<&str> = records.iter().map(|r| r.query_id.as_str()).collect();
    let mut sorted = ids.clone();
    sorted.sort();
    assert_eq!(ids, sorted);
    assert!(records.iter().all(|r| r.success && r.attempts.len() == 1));
    assert_eq!(records[0].final_sql.as_deref(), Some("SELECT 'question 1' AS q"));
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 1000, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn protocol_invariants(max_retries in 0usize..6, verdicts in prop::collection::vec(any::<bool>(), 0..10)) {
        let replies: Vec<String> = (0..10).map(|i| format!("SELECT {i}")).collect();
        let llm = ScriptedLlm::new("m", replies);
        let script: Vec<Verdict> = verdicts.iter().enumerate().map(|(i, ok)| if *ok { Ok(()) } else { Err(format!("err {i}\nline two")) }).collect();
        let val = ScriptedValidator::new(script);
        let r = generate_with_retry(&llm, &val, "q", &bundle(), max_retries, Sampling::default());

        prop_assert!(r.attempts.len() <= max_retries + 1);
        prop_assert_eq!(r.success, r.derived_success());
        if !r.success {
            prop_assert!(r.attempts.len() == max_retries + 1 || r.failure.is_some());
        }
        for (k, pair) in r.attempts.windows(2).enumerate() {
            let repair = &r.transcript[2 + 2 * k + 1];
            prop_assert_eq!(&repair.content, &build_repair_prompt(&pair[0].sql, pair[0].error.as_ref().unwrap()).unwrap());
        }
        let again = {
            let llm = ScriptedLlm::new("m", (0..10).map(|i| format!("SELECT {i}")));
            let val = ScriptedValidator::new(verdicts.iter().enumerate().map(|(i, ok)| if *ok { Ok(()) } else { Err(format!("err {i}\nline two")) }));
            generate_with_retry(&llm, &val, "q", &bundle(), max_retries, Sampling::default())
        };
        prop_assert_eq!(r.to_json_pretty(), again.to_json_pretty());
    }
}
