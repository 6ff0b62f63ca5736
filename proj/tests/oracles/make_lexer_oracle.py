"""Generates a 1,000-line Java file and counts its tokens with an
independent regex lexer. Writes <out>.java and <out>.expected.json."""
import json
import random
import re
import sys

KEYWORDS = set("""abstract assert boolean break byte case catch char class const continue default do double else
enum extends final finally float for goto if implements import instanceof int interface long native new package
private protected public return short static strictfp super switch synchronized this throw throws transient try
void volatile while""".split())

NUMBER = r"""0[xX][0-9a-fA-F_]+[lL]?|0[bB][01_]+[lL]?|(?:[0-9][0-9_]*\.?[0-9_]*|\.[0-9][0-9_]*)(?:[eE][+-]?[0-9_]+)?[fFdDlL]?"""
OPERATORS = sorted(""">>>= <<= >>= >>> ... -> :: ++ -- && || == != <= >= += -= *= /= &= |= ^= %= << >>
( ) [ ] ; , . @ = > < ! ~ ? : + - * / & | ^ %""".split(), key=len, reverse=True)

TOKEN = re.compile("|".join([
    r"(?P<ws>[ \t\r\n\f]+)",
    r"(?P<doc>/\*\*(?!/).*?\*/)",
    r"(?P<block>/\*.*?\*/)",
    r"(?P<line>//[^\r\n]*)",
    r'(?P<text>"""(?:\\.|(?!""").)*?""")',
    r'(?P<string>"(?:\\.|[^"\\\r\n])*")',
    r"(?P<char>'(?:\\.|[^'\\\r\n])*')",
    r"(?P<number>" + NUMBER + ")",
    r"(?P<word>[A-Za-z_$][A-Za-z0-9_$]*)",
    r"(?P<brace>[{}])",
    r"(?P<op>" + "|".join(re.escape(o) for o in OPERATORS) + ")",
]), re.S)


def lex(src):
    counts = {"identifier": 0, "keyword": 0, "operator": 0, "literal": 0, "comment": 0, "brace": 0}
    pos = 0
    while pos < len(src):
        m = TOKEN.match(src, pos)
        if not m:
            raise SystemExit(f"oracle cannot lex at {pos}: {src[pos:pos + 20]!r}")
        kind = m.lastgroup
        text = m.group()
        if kind in ("doc", "block", "line"):
            counts["comment"] += 1
        elif kind in ("text", "string", "char", "number"):
            counts["literal"] += 1
        elif kind == "word":
            if text in ("true", "false", "null"):
                counts["literal"] += 1
            elif text in KEYWORDS:
                counts["keyword"] += 1
            else:
                counts["identifier"] += 1
        elif kind == "brace":
            counts["brace"] += 1
        elif kind == "op":
            counts["operator"] += 1
        pos = m.end()
    return counts


def generate(rng):
    names = ["alpha", "beta", "gamma", "delta", "count", "total", "buffer", "value", "x", "y", "$tmp", "_idx"]
    nums = ["0", "42", "0x1F", "0b1010", "1_000L", "3.14", "2.5e-3", "1e10", "7f", ".5", "0.0d", "123L"]
    strs = ['"hello"', '"a\\"b"', '"tab\\t"', "'c'", "'\\n'", "'\\''", '""', '"x // not a comment"']
    ops = ["+", "-", "*", "/", "%", "<<", ">>", ">>>", "&", "|", "^", "&&", "||", "==", "!=", "<=", ">="]
    out = ["package org.sample.lex;", "", "import java.util.List;", ""]
    out.append("public class Big {")
    while len(out) < 990:
        r = rng.random()
        n = rng.choice(names)
        if r < 0.15:
            out.append(f"    /** Doc for {n}. */")
        elif r < 0.25:
            out.append(f"    // note on {n} {rng.choice(ops)} {rng.choice(nums)}")
        elif r < 0.30:
            out.append(f"    /* block {n}")
            out.append("       spans lines */")
        elif r < 0.55:
            out.append(f"    private long {n}{len(out)} = {rng.choice(nums)} {rng.choice(ops)} {rng.choice(nums)};")
        elif r < 0.70:
            out.append(f"    String s{len(out)} = {rng.choice(strs)} + {n}{rng.choice(['++', '--', ''])};")
        elif r < 0.80:
            out.append(f"    int m{len(out)}(int a, int... rest) {{ return a {rng.choice(ops)} rest.length; }}")
        elif r < 0.88:
            out.append(f"    void f{len(out)}() {{ {n} <<= 2; {n} >>>= 1; x = y instanceof Object ? 1 : 0; }}")
        elif r < 0.94:
            out.append(f"    List<List<String>> g{len(out)} = null; Runnable r{len(out)} = () -> {{}};")
        else:
            out.append(f'    String t{len(out)} = """')
            out.append(f"        text block {n} \\\"\"\" inner")
            out.append('        """;')
    out.append("}")
    while len(out) < 1000:
        out.append("// padding")
    return "\n".join(out[:1000]) + "\n"


def main(base):
    rng = random.Random(1000)
    src = generate(rng)
    assert src.count("\n") == 1000
    with open(base + ".java", "w") as f:
        f.write(src)
    counts = lex(src)
    with open(base + ".expected.json", "w") as f:
        json.dump({"lines": 1000, "counts": counts, "total": sum(counts.values())}, f, indent=1, sort_keys=True)


if __name__ == "__main__":
    main(sys.argv[1])
