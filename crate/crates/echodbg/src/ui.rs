//! Placeholder page served at `/` until a UI build is dropped in.

pub const INDEX_HTML: &str = r#"<!doctype html>
<html lang="en">
<head><meta charset="utf-8"><title>echodbg</title></head>
<body>
<h1>echodbg controller</h1>
<p>No UI build is bundled. The controller API is live:</p>
<ul>
<li><a href="/state">GET /state</a></li>
<li><a href="/map">GET /map</a></li>
<li>POST /op/step-both, /op/step-to-divergence, /op/step-to-convergence, /op/restart, /op/analyze, /op/goto</li>
</ul>
</body>
</html>
"#;
