use super::*;

const SNIPPET: &str = r#"
domain Tok { none, tok }
template Phil {
  internal state { T, H, E }
  port xin  : Tok readwrite
  port xout : Tok write
  init state == T
  trans enterH: state == T -> state := H
  trans pass:   state == T && xin == tok && xout == none -> xin := none, xout := tok
  trans eat:    state == H && xin == tok -> state := E
  trans exit:   state == E && xout == none -> state := T, xin := none, xout := tok
  prop inE  := state == E
  prop hungry := state == H
}
network ring3 {
  node p0 p1 p2 : Phil
  edge e0 e1 e2 : Tok
  connect p0 { xin = e0, xout = e1 }
  connect p1 { xin = e1, xout = e2 }
  connect p2 { xin = e2, xout = e0 }
  initially exactly_one(e0 == tok, e1 == tok, e2 == tok)
}
"#;

#[test]
fn verbatim_snippet_reads_its_write_only_port() {
    let err = parse_model(SNIPPET).unwrap_err();
    assert_eq!(err.0.len(), 1);
    assert_eq!(err.0[0].kind, DiagnosticKind::ModeViolation);
    assert!(err.0[0].message.contains("xout"));
}

#[test]
fn readwrite_snippet_parses() {
    let text = SNIPPET.replace("xout : Tok write", "xout : Tok readwrite");
    let doc = parse_model(&text).unwrap();
    assert_eq!(doc.domains.len(), 1);
    assert_eq!(doc.templates.len(), 1);
    assert_eq!(doc.networks.len(), 1);
    let net = &doc.networks[0];
    assert_eq!(net.nodes().len(), 3);
    assert_eq!(net.global_initial(1000).unwrap().len(), 3);
    let again = parse_model(&pretty_print(&doc)).unwrap();
    assert_eq!(again, doc);
}

#[test]
fn empty_input() {
    let doc = parse_model("").unwrap();
    assert!(doc.is_empty());
    let printed = pretty_print(&doc);
    assert!(printed.starts_with("// locsym model"));
    assert_eq!(parse_model(&printed).unwrap(), doc);
}

#[test]
fn assignment_arrow_must_match_mode() {
    let text = r#"
domain B { lo, hi }
template W { port o : B write  trans t: true -> o := hi }
network n {
  node a b : W
  edge e : B
  connect a { o -> e }
  connect b { o <- e }
}
"#;
    let err = parse_model(text).unwrap_err();
    assert_eq!(err.0[0].kind, DiagnosticKind::AssignmentViolation);
    let d = &err.0[0];
    assert!(d.span.start < text.len() && d.span.end <= text.len());
    assert_eq!(&text[d.span.start..d.span.start + 1], "b");
}

#[test]
fn forward_references_resolve() {
    let text = r#"
network n { node a : T  edge e : D  connect a { x = e } }
template T { port x : D readwrite }
domain D { u, v }
"#;
    let doc = parse_model(text).unwrap();
    assert_eq!(doc.networks[0].nodes()[0].template.name, "T");
}

#[test]
fn diagnostics_carry_spans() {
    for text in [
        "domain D { a, a }",
        "template T { internal x : Nope }",
        "template T { internal x { a } trans t: x == b -> }",
        "formula f := mu Z. !Z",
        "domain D { a } domain D { b }",
        "template T { @ }",
        "network n { node a : Missing }",
    ] {
        let err = parse_model(text).unwrap_err();
        for d in &err.0 {
            assert!(d.span.end <= text.len(), "{text}: {d}");
            assert!(d.span.start <= d.span.end);
        }
    }
    let err = parse_model("formula f := mu Z. !Z").unwrap_err();
    assert_eq!(err.0[0].kind, DiagnosticKind::Monotonicity);
}

#[test]
fn formula_parsing() {
    let text = SNIPPET.replace("xout : Tok write", "xout : Tok readwrite");
    let doc = parse_model(&text).unwrap();
    let tpl = &doc.templates[0];
    let f = parse_formula("E[ inE U[self] hungry ]", tpl).unwrap();
    assert_eq!(
        f,
        Formula::eu(Formula::prop("inE"), crate::mucalc::Label::Own, Formula::prop("hungry"))
    );
    let ag = parse_formula("AG (state==E -> xin==tok)", tpl).unwrap();
    let crate::mucalc::Formula::AG(Some(ls), _) = &ag else {
        panic!("{ag:?}")
    };
    assert_eq!(ls.len(), 3);
    assert_eq!(
        parse_formula("mu Z. not Z", tpl).unwrap_err().kind,
        DiagnosticKind::Monotonicity
    );
    assert_eq!(
        parse_formula("E[true U[left] inE]", tpl).unwrap_err().kind,
        DiagnosticKind::UnresolvedName
    );
    assert_eq!(parse_formula("nope", tpl).unwrap_err().kind, DiagnosticKind::UnresolvedName);
}

#[test]
fn formula_display_round_trips() {
    for text in [
        "AG (p -> q)",
        "mu Z. p || E[q U[self] Z]",
        "!(nu Y. Y && p) && q",
        "A[p W[left] !q]",
        "EF[self, left] (x == a)",
        "p -> q -> r",
        "(p -> q) -> r",
        "p && (q || r)",
        "AF EG p",
    ] {
        let f = parse_formula_unresolved(text).unwrap();
        let again = parse_formula_unresolved(&f.to_string()).unwrap();
        assert_eq!(again, f, "{text} printed as {f}");
    }
}
