/**
 * Minimal LSP client over a child process on stdio.
 *
 * Deliberately thin: it moves documents and requests between the editor and
 * the server and keeps no analysis logic of its own. If the server dies
 * unexpectedly it is restarted once (re-opening known documents); a second
 * death is reported through onUnavailable.
 */

import { ChildProcess, spawn } from "child_process";
import { frameMessage, MessageReader } from "./protocol";

export interface ServerOptions {
  command: string;
  args: string[];
  initializationOptions?: unknown;
}

interface PendingRequest {
  resolve: (value: any) => void;
  reject: (error: Error) => void;
}

export interface ResponseErrorData {
  code: number;
  message: string;
  data?: any;
}

export class LspResponseError extends Error {
  constructor(public readonly code: number, message: string, public readonly data?: any) {
    super(message);
  }
}

interface OpenDocument {
  languageId: string;
  version: number;
  text: string;
}

export class LspClient {
  private child: ChildProcess | null = null;
  private nextId = 1;
  private pending = new Map<number, PendingRequest>();
  private notificationHandlers = new Map<string, (params: any) => void>();
  private openDocuments = new Map<string, OpenDocument>();
  private restartsLeft = 1;
  private stopped = false;

  onUnavailable: ((reason: string) => void) | null = null;

  constructor(private readonly options: ServerOptions) {}

  get processId(): number | undefined {
    return this.child?.pid;
  }

  async start(): Promise<void> {
    await this.spawnAndInitialize();
  }

  private spawnAndInitialize(): Promise<void> {
    return new Promise((resolve, reject) => {
      const child = spawn(this.options.command, this.options.args, {
        stdio: ["pipe", "pipe", "pipe"],
      });
      let settled = false;
      child.on("error", (error) => {
        if (!settled) {
          settled = true;
          reject(new Error(`failed to start ${this.options.command}: ${error.message}`));
        }
      });
      const reader = new MessageReader((message) => this.dispatch(message));
      child.stdout!.on("data", (chunk: Buffer) => reader.feed(chunk));
      child.on("exit", (code) => this.handleExit(code));
      this.child = child;

      this.request("initialize", {
        processId: process.pid,
        rootUri: null,
        capabilities: {},
        initializationOptions: this.options.initializationOptions ?? {},
      })
        .then(() => {
          this.notify("initialized", {});
          if (!settled) {
            settled = true;
            resolve();
          }
        })
        .catch((error) => {
          if (!settled) {
            settled = true;
            reject(error);
          }
        });
    });
  }

  private handleExit(code: number | null): void {
    const reason = `server exited with code ${code ?? "unknown"}`;
    for (const [, pending] of this.pending) {
      pending.reject(new Error(reason));
    }
    this.pending.clear();
    this.child = null;
    if (this.stopped) {
      return;
    }
    if (this.restartsLeft > 0) {
      this.restartsLeft -= 1;
      this.spawnAndInitialize()
        .then(() => {
          for (const [uri, doc] of this.openDocuments) {
            this.notify("textDocument/didOpen", {
              textDocument: {
                uri,
                languageId: doc.languageId,
                version: doc.version,
                text: doc.text,
              },
            });
          }
        })
        .catch((error) => {
          this.onUnavailable?.(`restart failed: ${error.message}`);
        });
    } else {
      this.onUnavailable?.(reason);
    }
  }

  private dispatch(message: any): void {
    if (message.id !== undefined && (message.result !== undefined || message.error !== undefined)) {
      const pending = this.pending.get(message.id);
      if (pending) {
        this.pending.delete(message.id);
        if (message.error) {
          pending.reject(
            new LspResponseError(message.error.code, message.error.message, message.error.data)
          );
        } else {
          pending.resolve(message.result);
        }
      }
      return;
    }
    if (message.method) {
      const handler = this.notificationHandlers.get(message.method);
      if (handler) {
        handler(message.params);
      }
    }
  }

  onNotification(method: string, handler: (params: any) => void): void {
    this.notificationHandlers.set(method, handler);
  }

  request<T = any>(method: string, params: unknown): Promise<T> {
    const child = this.child;
    if (!child || !child.stdin) {
      return Promise.reject(new Error("language server is not running"));
    }
    const id = this.nextId++;
    const promise = new Promise<T>((resolve, reject) => {
      this.pending.set(id, { resolve, reject });
    });
    child.stdin.write(frameMessage({ jsonrpc: "2.0", id, method, params }));
    return promise;
  }

  notify(method: string, params: unknown): void {
    this.child?.stdin?.write(frameMessage({ jsonrpc: "2.0", method, params }));
  }

  openDocument(uri: string, languageId: string, version: number, text: string): void {
    this.openDocuments.set(uri, { languageId, version, text });
    this.notify("textDocument/didOpen", {
      textDocument: { uri, languageId, version, text },
    });
  }

  changeDocument(uri: string, version: number, text: string): void {
    const doc = this.openDocuments.get(uri);
    if (doc) {
      doc.version = version;
      doc.text = text;
    }
    this.notify("textDocument/didChange", {
      textDocument: { uri, version },
      contentChanges: [{ text }],
    });
  }

  closeDocument(uri: string): void {
    this.openDocuments.delete(uri);
    this.notify("textDocument/didClose", { textDocument: { uri } });
  }

  async stop(): Promise<void> {
    this.stopped = true;
    const child = this.child;
    if (!child) {
      return;
    }
    try {
      await this.request("shutdown", {});
      this.notify("exit", {});
    } catch {
      // fall through to kill
    }
    setTimeout(() => {
      if (child.exitCode === null) {
        child.kill();
      }
    }, 500);
  }
}
