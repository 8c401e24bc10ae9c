import { mkdtempSync, readFileSync, writeFileSync } from "fs";
import { tmpdir } from "os";
import { join } from "path";
import { describe, expect, it } from "vitest";
import { main } from "../src/cli.js";
import { CSV_HEADER } from "../src/csv.js";

const SAMPLE = new URL("./fixtures/sample.csv", import.meta.url).pathname;

function tmp(name: string): string {
  return join(mkdtempSync(join(tmpdir(), "risra-plot-")), name);
}

describe("cli", () => {
  it("renders every preset end to end", async () => {
    for (const id of ["fig5a", "fig5b", "fig6", "fig7"]) {
      const out = tmp(`${id}.svg`);
      const code = await main(["--figure", id, "--in", SAMPLE, "--out", out]);
      expect(code).toBe(0);
      expect(readFileSync(out, "utf-8")).toContain("</svg>");
    }
  });

  it("fails clearly on schema violations", async () => {
    const bad = tmp("bad.csv");
    writeFileSync(bad, "not,the,schema\n1,2,3\n");
    const code = await main(["--figure", "fig6", "--in", bad, "--out", tmp("x.svg")]);
    expect(code).toBe(1);
  });

  it("fails on an empty csv", async () => {
    const empty = tmp("empty.csv");
    writeFileSync(empty, "");
    const code = await main(["--figure", "fig6", "--in", empty, "--out", tmp("x.svg")]);
    expect(code).toBe(1);
  });

  it("fails when the preset has no rows", async () => {
    const partial = tmp("partial.csv");
    writeFileSync(partial, `${CSV_HEADER}\n` +
      "fig7,150,gscap,tdma,0,0.001,46,150,5,0.5,0.01,0.1,0.01,0.001,1\n");
    const code = await main(["--figure", "fig6", "--in", partial,
                             "--out", tmp("x.svg")]);
    expect(code).toBe(1);
  });

  it("rejects bad arguments with exit code 2", async () => {
    expect(await main(["--figure", "fig6"])).toBe(2);
    expect(await main(["--bogus"])).toBe(2);
    expect(await main(["--figure", "fig6", "--in", SAMPLE, "--format", "gif"])).toBe(2);
  });
});
