/** Thin fetch client for the five service endpoints. */

import type {
  ApiErrorBody,
  ComponentInfo,
  ErcReport,
  LayoutResponse,
  ValidateResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(readonly status: number, readonly body: ApiErrorBody) {
    super(body.path ? `${body.code}: ${body.message} (${body.path})`
                    : `${body.code}: ${body.message}`);
    this.name = "ApiError";
  }
}

async function readError(response: Response): Promise<never> {
  let body: ApiErrorBody;
  try {
    body = (await response.json()) as ApiErrorBody;
  } catch {
    body = { code: "HttpError", message: `HTTP ${response.status}` };
  }
  throw new ApiError(response.status, body);
}

export class ApiClient {
  constructor(
    readonly baseUrl: string = "",
    private readonly fetchImpl: typeof fetch = fetch,
  ) {}

  private async post(path: string, body: string): Promise<Response> {
    return this.fetchImpl(`${this.baseUrl}${path}`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body,
    });
  }

  async validate(documentText: string): Promise<ValidateResponse> {
    const response = await this.post("/v1/validate", documentText);
    if (!response.ok) await readError(response);
    return (await response.json()) as ValidateResponse;
  }

  async erc(documentText: string): Promise<ErcReport> {
    const response = await this.post("/v1/erc", documentText);
    if (!response.ok) await readError(response);
    return (await response.json()) as ErcReport;
  }

  async layout(circuit: unknown, seed: number): Promise<LayoutResponse> {
    const response = await this.post("/v1/layout",
                                     JSON.stringify({ circuit, seed }));
    if (!response.ok) await readError(response);
    return (await response.json()) as LayoutResponse;
  }

  async components(): Promise<ComponentInfo[]> {
    const response = await this.fetchImpl(`${this.baseUrl}/v1/components`);
    if (!response.ok) await readError(response);
    const body = (await response.json()) as { components: ComponentInfo[] };
    return body.components;
  }
}
