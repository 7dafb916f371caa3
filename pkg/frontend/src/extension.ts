/**
 * VS Code client for the a11y-forge language server.
 *
 * All analysis lives in the server; this extension forwards documents,
 * surfaces diagnostics and quick fixes, runs the two commands, applies
 * returned workspace edits, and opens generated report files read-only.
 */

import * as fs from "fs";
import * as vscode from "vscode";
import { findServer, resolveConfig } from "./config";
import { LspClient, LspResponseError } from "./lspClient";

export const SUPPORTED_LANGUAGES = [
  "javascript",
  "javascriptreact",
  "typescript",
  "typescriptreact",
  "html",
];

export const REPORT_SCHEME = "a11y-forge-report";

const SEVERITIES: Record<number, vscode.DiagnosticSeverity> = {
  1: vscode.DiagnosticSeverity.Error,
  2: vscode.DiagnosticSeverity.Warning,
  3: vscode.DiagnosticSeverity.Information,
  4: vscode.DiagnosticSeverity.Hint,
};

function toVsRange(range: any): vscode.Range {
  return new vscode.Range(
    new vscode.Position(range.start.line, range.start.character),
    new vscode.Position(range.end.line, range.end.character)
  );
}

function toLspRange(range: vscode.Range): unknown {
  return {
    start: { line: range.start.line, character: range.start.character },
    end: { line: range.end.line, character: range.end.character },
  };
}

function toVsDiagnostic(raw: any): vscode.Diagnostic {
  const diagnostic = new vscode.Diagnostic(
    toVsRange(raw.range),
    raw.message,
    SEVERITIES[raw.severity] ?? vscode.DiagnosticSeverity.Error
  );
  diagnostic.source = raw.source;
  if (raw.code && raw.codeDescription?.href) {
    diagnostic.code = {
      value: raw.code,
      target: vscode.Uri.parse(raw.codeDescription.href),
    };
  } else if (raw.code) {
    diagnostic.code = raw.code;
  }
  return diagnostic;
}

function supported(document: vscode.TextDocument): boolean {
  return SUPPORTED_LANGUAGES.includes(document.languageId);
}

export async function activate(
  context: vscode.ExtensionContext
): Promise<LspClient | undefined> {
  const config = resolveConfig();
  const serverCommand = findServer(config.serverPath);
  if (!serverCommand) {
    void vscode.window.showErrorMessage(
      `a11y-forge language server not found at "${config.serverPath}". ` +
        "Install the a11y-forge package or point a11yForge.serverPath at the executable."
    );
    return undefined;
  }

  const initializationOptions: Record<string, unknown> = {};
  if (config.configPath) {
    initializationOptions.configPath = config.configPath;
  }
  const client = new LspClient({
    command: serverCommand,
    args: config.serverArgs,
    initializationOptions,
  });

  const diagnostics = vscode.languages.createDiagnosticCollection("a11y-forge");
  context.subscriptions.push(diagnostics, { dispose: () => void client.stop() });

  client.onNotification("textDocument/publishDiagnostics", (params) => {
    diagnostics.set(
      vscode.Uri.parse(params.uri),
      (params.diagnostics ?? []).map(toVsDiagnostic)
    );
  });
  client.onNotification("window/showMessage", (params) => {
    if (params.type === 1) {
      void vscode.window.showErrorMessage(params.message);
    } else if (params.type === 2) {
      void vscode.window.showWarningMessage(params.message);
    } else {
      void vscode.window.showInformationMessage(params.message);
    }
  });
  client.onUnavailable = (reason) => {
    void vscode.window.showErrorMessage(
      `The a11y-forge language server stopped and could not be restarted (${reason}).`
    );
  };

  await client.start();

  const openDocument = (document: vscode.TextDocument) => {
    if (supported(document)) {
      client.openDocument(
        document.uri.toString(),
        document.languageId,
        document.version,
        document.getText()
      );
    }
  };
  vscode.workspace.textDocuments.forEach(openDocument);
  context.subscriptions.push(
    vscode.workspace.onDidOpenTextDocument(openDocument),
    vscode.workspace.onDidChangeTextDocument((event) => {
      if (supported(event.document)) {
        client.changeDocument(
          event.document.uri.toString(),
          event.document.version,
          event.document.getText()
        );
      }
    }),
    vscode.workspace.onDidCloseTextDocument((document) => {
      if (supported(document)) {
        client.closeDocument(document.uri.toString());
        diagnostics.delete(document.uri);
      }
    })
  );

  context.subscriptions.push(
    vscode.languages.registerCodeActionsProvider(
      SUPPORTED_LANGUAGES.map((language) => ({ language })),
      {
        async provideCodeActions(document, range) {
          if (!supported(document)) {
            return [];
          }
          const actions = await client.request<any[]>("textDocument/codeAction", {
            textDocument: { uri: document.uri.toString() },
            range: toLspRange(range),
            context: { diagnostics: [] },
          });
          return (actions ?? []).map((raw) => {
            const action = new vscode.CodeAction(raw.title, vscode.CodeActionKind.QuickFix);
            action.command = {
              title: raw.title,
              command: "a11yForge.getFixSuggestion",
              arguments: raw.command?.arguments ?? [],
            };
            return action;
          });
        },
      },
      { providedCodeActionKinds: [vscode.CodeActionKind.QuickFix] }
    )
  );

  context.subscriptions.push(
    vscode.workspace.registerTextDocumentContentProvider(REPORT_SCHEME, {
      provideTextDocumentContent(uri: vscode.Uri): string {
        return fs.readFileSync(uri.path, "utf8");
      },
    })
  );

  context.subscriptions.push(
    vscode.commands.registerCommand(
      "a11yForge.getFixSuggestion",
      (uri?: string, range?: unknown) => runGetFix(client, uri, range)
    ),
    vscode.commands.registerCommand("a11yForge.checkSelection", () => runCheckSelection(client))
  );

  return client;
}

async function runGetFix(client: LspClient, uri?: string, range?: unknown): Promise<void> {
  if (!uri || !range) {
    const editor = vscode.window.activeTextEditor;
    if (!editor) {
      void vscode.window.showWarningMessage("No active editor to fix.");
      return;
    }
    uri = editor.document.uri.toString();
    range = toLspRange(editor.selection);
  }
  try {
    const result = await vscode.window.withProgress(
      {
        location: vscode.ProgressLocation.Notification,
        title: "a11y-forge: asking the model for a fix suggestion…",
        cancellable: true,
      },
      async (_progress, token) => {
        const response = await client.request<any>("workspace/executeCommand", {
          command: "a11y.fixWithAI",
          arguments: [uri, range],
        });
        if (token.isCancellationRequested) {
          return undefined; // cancelled: leave the buffer untouched
        }
        return response;
      }
    );
    if (!result) {
      return;
    }
    const edit = new vscode.WorkspaceEdit();
    const changes = result.edit?.changes ?? {};
    for (const [editUri, textEdits] of Object.entries<any>(changes)) {
      for (const textEdit of textEdits as any[]) {
        edit.insert(
          vscode.Uri.parse(editUri),
          new vscode.Position(textEdit.range.start.line, textEdit.range.start.character),
          textEdit.newText
        );
      }
    }
    await vscode.workspace.applyEdit(edit);
    void vscode.window.showInformationMessage(
      `Fix suggestions inserted; sidecar written to ${result.sidecarPath}`
    );
  } catch (error) {
    reportCommandError("fix suggestion", error);
  }
}

async function runCheckSelection(client: LspClient): Promise<void> {
  const editor = vscode.window.activeTextEditor;
  if (!editor || editor.selection.isEmpty) {
    void vscode.window.showWarningMessage("Select a block of code to analyze first.");
    return;
  }
  const uri = editor.document.uri.toString();
  const range = toLspRange(editor.selection);
  try {
    const result = await vscode.window.withProgress(
      {
        location: vscode.ProgressLocation.Notification,
        title: "a11y-forge: analyzing the selection…",
        cancellable: true,
      },
      async (_progress, token) => {
        const response = await client.request<any>("workspace/executeCommand", {
          command: "a11y.checkAndFixWithAI",
          arguments: [uri, range],
        });
        if (token.isCancellationRequested) {
          return undefined;
        }
        return response;
      }
    );
    if (!result) {
      return;
    }
    const reportUri = vscode.Uri.file(result.reportPath).with({ scheme: REPORT_SCHEME });
    const document = await vscode.workspace.openTextDocument(reportUri);
    await vscode.window.showTextDocument(document, {
      viewColumn: vscode.ViewColumn.Beside,
      preview: false,
    });
  } catch (error) {
    reportCommandError("accessibility check", error);
  }
}

function reportCommandError(what: string, error: unknown): void {
  let message = `a11y-forge ${what} failed`;
  if (error instanceof LspResponseError) {
    message += `: ${error.message}`;
    const sidecar = error.data?.sidecarPath;
    if (sidecar) {
      message += ` (raw response saved to ${sidecar})`;
    }
  } else if (error instanceof Error) {
    message += `: ${error.message}`;
  }
  void vscode.window.showErrorMessage(message);
}

export function deactivate(): void {
  // client shutdown handled through context.subscriptions disposal
}
