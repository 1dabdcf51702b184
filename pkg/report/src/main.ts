/**
 * Report generator entry point. Reads one or more stats CSVs produced by the
 * simulator, renders the standard figure set as SVG and PNG, and writes the
 * policy summary table as markdown and CSV. Inputs are never modified.
 *
 * Usage: node dist/main.js <stats.csv> [more.csv ...] [--out DIR]
 */

import { readFileSync, writeFileSync, mkdirSync } from "node:fs";
import { join } from "node:path";

import { parseStatsCsv } from "./csv.js";
import { ResultsFrame } from "./frame.js";
import {
  figSpeedup,
  figW2w,
  figWblp,
  figWriteMode,
  figWrqSensitivity,
} from "./figures.js";
import { Chart } from "./chart.js";
import { chartToSvg } from "./svg.js";
import { rasterize } from "./raster.js";
import { encodePng } from "./png.js";
import { summarize, summaryCsv, summaryMarkdown } from "./summary.js";

export function makeReport(csvPaths: string[], outDir: string): string[] {
  const frame = new ResultsFrame();
  for (const path of csvPaths) {
    frame.addFile(parseStatsCsv(readFileSync(path, "utf8"), path));
  }
  const plain = frame.rows.filter((r) => r.wrq === null);
  const swept = frame.rows.filter((r) => r.wrq !== null);
  const charts: Chart[] = [];
  if (plain.length > 0) {
    charts.push(figWblp(plain), figWriteMode(plain), figW2w(plain));
    if (plain.some((r) => r.policy !== "baseline")) {
      charts.push(figSpeedup(plain));
    }
  }
  if (swept.length > 0) charts.push(figWrqSensitivity(swept));
  if (charts.length === 0) throw new Error("no result rows in the inputs");

  mkdirSync(outDir, { recursive: true });
  const written: string[] = [];
  for (const chart of charts) {
    const svgPath = join(outDir, `${chart.name}.svg`);
    writeFileSync(svgPath, chartToSvg(chart));
    written.push(svgPath);
    const r = rasterize(chart);
    const pngPath = join(outDir, `${chart.name}.png`);
    writeFileSync(pngPath, encodePng(r.width, r.height, r.data));
    written.push(pngPath);
  }
  if (plain.length > 0) {
    const summaries = summarize(plain);
    const mdPath = join(outDir, "summary.md");
    writeFileSync(mdPath, summaryMarkdown(summaries));
    written.push(mdPath);
    const csvPath = join(outDir, "summary.csv");
    writeFileSync(csvPath, summaryCsv(summaries));
    written.push(csvPath);
  }
  return written;
}

function cliMain(argv: string[]): number {
  const paths: string[] = [];
  let outDir = "report-out";
  for (let i = 0; i < argv.length; i++) {
    if (argv[i] === "--out") {
      outDir = argv[++i];
      if (outDir === undefined) {
        console.error("--out needs a directory");
        return 1;
      }
    } else if (argv[i].startsWith("-")) {
      console.error(`unknown option ${argv[i]}`);
      return 1;
    } else {
      paths.push(argv[i]);
    }
  }
  if (paths.length === 0) {
    console.error("usage: node dist/main.js <stats.csv> [more.csv ...] [--out DIR]");
    return 1;
  }
  try {
    const written = makeReport(paths, outDir);
    for (const f of written) console.log(f);
    return 0;
  } catch (err) {
    console.error(err instanceof Error ? err.message : String(err));
    return 2;
  }
}

if (process.argv[1] && process.argv[1].endsWith("main.js")) {
  process.exit(cliMain(process.argv.slice(2)));
}
