/**
 * Client integration suite: the extension runs against the mocked vscode
 * API but talks to the real a11y-forge language server over stdio, using
 * the corpus replay fixtures. Mirrors the editor smoke criterion.
 */

import * as assert from "assert";
import * as fs from "fs";
import * as os from "os";
import * as path from "path";
import * as vscode from "vscode";
import { REPORT_SCHEME, activate } from "../src/extension";
import { LspClient } from "../src/lspClient";

const mock = vscode as any;
const ROOT = path.resolve(__dirname, "..", "..", "..");
const CORPUS = path.join(ROOT, "corpus");
const GOLDEN = path.join(ROOT, "tests", "golden");
const TOOLTIP_TEXT = fs.readFileSync(path.join(CORPUS, "tooltip", "input.js"), "utf8");

async function until(predicate: () => boolean, timeoutMs = 15000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    if (predicate()) {
      return;
    }
    await new Promise((resolve) => setTimeout(resolve, 25));
  }
  throw new Error("condition not met in time");
}

describe("extension against the real language server", function () {
  this.timeout(30000);

  let tmpDir: string;
  let context: { subscriptions: { dispose(): void }[] };
  let client: LspClient | undefined;

  function engineConfigPath(): string {
    const fixtures = path.join(CORPUS, "tooltip", "fixtures");
    const configPath = path.join(tmpDir, "a11y-forge.toml");
    fs.writeFileSync(
      configPath,
      `provider = "replay"\n` +
        `fixtures_dirs = [${JSON.stringify(fixtures)}]\n` +
        `output_dir = ${JSON.stringify(tmpDir)}\n` +
        `debounce_ms = 0\n`
    );
    return configPath;
  }

  function openTooltipDocument(): any {
    const uri = mock.Uri.parse("file:///workspace/input.js");
    const document = new mock.MockTextDocument(uri, "javascript", TOOLTIP_TEXT);
    mock._state.documents.push(document);
    return document;
  }

  function diagnosticsFor(document: any): any[] | undefined {
    const collection = mock._state.diagnosticCollections[0];
    return collection ? collection.get(document.uri) : undefined;
  }

  beforeEach(() => {
    mock._reset();
    tmpDir = fs.mkdtempSync(path.join(os.tmpdir(), "a11y-client-"));
    mock._state.configuration.a11yForge = {
      serverPath: "a11y-forge-lsp",
      configPath: engineConfigPath(),
    };
    context = { subscriptions: [] };
    client = undefined;
  });

  afterEach(async () => {
    for (const disposable of context.subscriptions) {
      disposable.dispose();
    }
    await new Promise((resolve) => setTimeout(resolve, 100));
  });

  it("activation shows both diagnostics on the tooltip document", async () => {
    const document = openTooltipDocument();
    client = await activate(context as any);
    assert.ok(client, "client should start");
    await until(() => (diagnosticsFor(document) ?? []).length === 2);
    const diagnostics = diagnosticsFor(document)!;
    const codes = diagnostics.map((d: any) =>
      typeof d.code === "object" ? d.code.value : d.code
    );
    assert.deepStrictEqual(codes.sort(), ["WCAG 2.1.1", "WCAG 4.1.2"]);
    assert.ok(diagnostics.every((d: any) => d.source === "a11y-forge"));
    assert.ok(
      diagnostics.every(
        (d: any) => typeof d.code !== "object" || String(d.code.target).includes("w3.org")
      ),
      "diagnostics carry documentation links"
    );
  });

  it("quick fix command inserts the golden annotation through a workspace edit", async () => {
    const document = openTooltipDocument();
    client = await activate(context as any);
    await until(() => (diagnosticsFor(document) ?? []).length === 2);

    const provider = mock._state.codeActionProviders[0].provider;
    const flagged = diagnosticsFor(document)![0].range;
    const actions = await provider.provideCodeActions(document, flagged);
    assert.strictEqual(actions.length, 1);
    assert.strictEqual(actions[0].title, "Get fix suggestion from AI");

    await mock.commands.executeCommand(
      actions[0].command.command,
      ...actions[0].command.arguments
    );
    assert.strictEqual(mock._state.appliedEdits.length, 1);
    const golden = fs.readFileSync(path.join(GOLDEN, "tooltip_annotated.golden"), "utf8");
    assert.strictEqual(document.getText(), golden);
    assert.ok(
      mock._state.infoMessages.some((m: string) => m.includes("a11y-fix.txt")),
      "sidecar path surfaced to the user"
    );
  });

  it("check-and-fix opens the golden report read-only beside the editor", async () => {
    const document = openTooltipDocument();
    client = await activate(context as any);
    await until(() => (diagnosticsFor(document) ?? []).length === 2);

    mock.window.activeTextEditor = {
      document,
      selection: new mock.Selection(new mock.Position(8, 4), new mock.Position(15, 10)),
    };
    await mock.commands.executeCommand("a11yForge.checkSelection");

    assert.strictEqual(mock._state.shownDocuments.length, 1);
    const shown = mock._state.shownDocuments[0];
    assert.strictEqual(shown.document.uri.scheme, REPORT_SCHEME);
    assert.strictEqual(shown.options.viewColumn, mock.ViewColumn.Beside);
    const golden = fs.readFileSync(path.join(GOLDEN, "tooltip_report.golden"), "utf8");
    assert.strictEqual(shown.document.getText(), golden);
    // source buffer untouched by the check workflow
    assert.strictEqual(document.getText(), TOOLTIP_TEXT);
    assert.strictEqual(mock._state.appliedEdits.length, 0);
  });

  it("check-and-fix without a selection warns and sends nothing", async () => {
    openTooltipDocument();
    client = await activate(context as any);
    mock.window.activeTextEditor = {
      document: mock._state.documents[0],
      selection: new mock.Selection(new mock.Position(0, 0), new mock.Position(0, 0)),
    };
    await mock.commands.executeCommand("a11yForge.checkSelection");
    assert.ok(mock._state.warningMessages.some((m: string) => m.includes("Select a block")));
    assert.strictEqual(mock._state.shownDocuments.length, 0);
  });

  it("cancelled progress applies no edit", async () => {
    const document = openTooltipDocument();
    client = await activate(context as any);
    await until(() => (diagnosticsFor(document) ?? []).length === 2);
    const provider = mock._state.codeActionProviders[0].provider;
    const actions = await provider.provideCodeActions(
      document,
      diagnosticsFor(document)![0].range
    );
    mock._state.cancelNextProgress = true;
    await mock.commands.executeCommand(
      actions[0].command.command,
      ...actions[0].command.arguments
    );
    assert.strictEqual(mock._state.appliedEdits.length, 0);
    assert.strictEqual(document.getText(), TOOLTIP_TEXT);
  });

  it("document edits propagate and clear diagnostics", async () => {
    const document = openTooltipDocument();
    client = await activate(context as any);
    await until(() => (diagnosticsFor(document) ?? []).length === 2);
    const fixed = fs.readFileSync(path.join(CORPUS, "tooltip-fixed", "input.js"), "utf8");
    document._text = fixed;
    document.version = 2;
    mock._state.changeEmitter.fire({ document });
    await until(() => (diagnosticsFor(document) ?? []).length === 0);
  });

  it("restarts the server once after a crash, then reports", async () => {
    const document = openTooltipDocument();
    client = await activate(context as any);
    await until(() => (diagnosticsFor(document) ?? []).length === 2);

    const firstPid = client!.processId!;
    mock._state.diagnosticCollections[0].clear();
    process.kill(firstPid, "SIGKILL");
    await until(() => client!.processId !== undefined && client!.processId !== firstPid);
    await until(() => (diagnosticsFor(document) ?? []).length === 2);

    const secondPid = client!.processId!;
    process.kill(secondPid, "SIGKILL");
    await until(() =>
      mock._state.errorMessages.some((m: string) => m.includes("could not be restarted"))
    );
  });

  it("missing server executable produces an actionable setup error", async () => {
    mock._state.configuration.a11yForge = {
      serverPath: "/definitely/not/here/a11y-forge-lsp",
    };
    const result = await activate(context as any);
    assert.strictEqual(result, undefined);
    assert.ok(
      mock._state.errorMessages.some((m: string) =>
        m.includes("/definitely/not/here/a11y-forge-lsp")
      )
    );
  });

  it("manifest contributes both commands and the context-menu entry", () => {
    const manifest = JSON.parse(
      fs.readFileSync(path.join(__dirname, "..", "..", "..", "frontend", "package.json"), "utf8")
    );
    const commands = manifest.contributes.commands.map((c: any) => c.title);
    assert.deepStrictEqual(commands, [
      "Get fix suggestion from AI",
      "Check and fix accessibility issues with AI",
    ]);
    const menu = manifest.contributes.menus["editor/context"][0];
    assert.strictEqual(menu.command, "a11yForge.checkSelection");
    assert.strictEqual(menu.when, "editorHasSelection");
    assert.ok(manifest.activationEvents.every((e: string) => e.startsWith("onLanguage:")));
  });
});
